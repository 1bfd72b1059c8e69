function kind(v) {
  if (typeof v === 'string') {
    return 'string';
  }
  if (v === null) {
    return 'null';
  }
  if (v instanceof Array) {
    return 'array';
  }
  return typeof v;
}
