var a = 1
var b = 2
function f() {
  return
}
a++
b--
