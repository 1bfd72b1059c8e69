function deep(a) {
  if (a) {
    while (a.next) {
      for (var i = 0; i < a.items.length; i++) {
        if (a.items[i]) {
          a = a.items[i];
        }
      }
    }
  }
  return a;
}
