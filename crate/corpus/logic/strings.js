var s1 = 'single';
var s2 = "double";
var s3 = 'it\'s';
var s4 = "line\nbreak";
var s5 = '';
