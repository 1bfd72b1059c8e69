function transpose(m) {
  var out = [];
  for (var c = 0; c < m[0].length; c++) {
    out[c] = [];
    for (var r = 0; r < m.length; r++) {
      out[c][r] = m[r][c];
    }
  }
  return out;
}
