var anon = function () {
  return 1;
};
var named = function fact(n) {
  if (n <= 1) {
    return 1;
  }
  return n * fact(n - 1);
};
