var state = { page: 1, loading: false, done: false };
function more() {
  if (state.loading || state.done) {
    return;
  }
  state.loading = true;
  fetchPage(state.page, function (rows) {
    state.loading = false;
    if (rows.length === 0) {
      state.done = true;
    } else {
      state.page++;
    }
  });
}
