var i = 0;
for (;;) {
  if (i >= 10) return;
  i++;
}
for (i = 0; ; i++) {
  if (i > 3) {
    return;
  }
}
for (; i < 5;) i += 2;
for (;; i--) {
  return;
}
for (let j = 0; j < 3;) {
  j++;
}
