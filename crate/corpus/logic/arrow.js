const double = (x) => x * 2;
const add = (a, b) => {
  return a + b;
};
const noop = () => {};
const nested = (f) => (x) => f(f(x));
