function outer() {
  var x = 1;
  function inner() {
    return x + 1;
  }
  return inner();
}
