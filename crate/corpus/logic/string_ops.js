function reverse(s) {
  var out = '';
  for (var i = s.length - 1; i >= 0; i--) {
    out += s.charAt(i);
  }
  return out;
}
