var a = 0;
var b = 3.14;
var c = 0.5;
var d = 1e3;
var e = 0xff;
