var x = 1 + 2 - 3 * 4 / 5 % 6;
var y = x < 1 || x > 2 && x <= 3 || x >= 4;
var z = x == 1 || x != 2 || x === 3 || x !== 4;
var w = 'k' in obj;
var v = obj instanceof Array;
var p = (1 + 2) * 3;
