function abs(x) {
  if (x < 0) x = -x;
  return x;
}
