/* block comment
   spanning lines */
var a = 1; // trailing
// whole line
function f() {
  /* inner */ return a;
}
