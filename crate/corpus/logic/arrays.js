var empty = [];
var grid = [[1, 2], [3, 4]];
var mixed = [1, 'two', true, null, { k: 3 }, function () {}];
var trailing = [1, 2, 3,];
