function validPhone(p) {
  if (p.length !== 11) {
    return false;
  }
  for (var i = 0; i < p.length; i++) {
    var c = p.charCodeAt(i);
    if (c < 48 || c > 57) {
      return false;
    }
  }
  return true;
}
