var a = !true;
var b = -1;
var c = +'3';
var d = ~5;
var e = typeof a;
var f = void 0;
delete config.name;
++a;
--b;
a++;
b--;
