function a() {
  return;
}
function b() {
  return 1;
}
function c(x) {
  return x && 1;
}
