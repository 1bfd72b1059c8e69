var total = [1, 2, 3].reduce((acc, x) => acc + x, 0);
var evens = [1, 2, 3, 4].filter(function (x) {
  return x % 2 === 0;
});
