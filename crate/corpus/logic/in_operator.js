function has(obj, key) {
  return key in obj && obj[key] !== void 0;
}
