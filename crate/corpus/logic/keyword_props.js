var o = { if: 1, for: 2, return: 3, function: 4, this: 5 };
var v = o.if + o.for + o.return;
o.delete = true;
