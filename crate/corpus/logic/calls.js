f();
f(1);
f(1, 2, 3);
g(h(i(j())));
obj.method(arg).then(function (res) {
  return res.data;
});
