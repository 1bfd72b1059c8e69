function countdown(n) {
  while (n > 0) {
    console.log(n);
    n--;
  }
  return n;
}
