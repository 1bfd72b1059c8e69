var v = a.b.c;
var w = a[0][1];
var x = a.b[2].c(3)[4];
var y = this.data.list[index].name;
