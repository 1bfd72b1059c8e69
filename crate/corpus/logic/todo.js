Page({
  data: { todos: [], input: '' },
  onInput: function (e) {
    this.setData({ input: e.detail.value });
  },
  addTodo: function () {
    if (!this.data.input) {
      return;
    }
    var todos = this.data.todos;
    todos.push({ text: this.data.input, done: false });
    this.setData({ todos: todos, input: '' });
  },
  toggle: function (e) {
    var i = e.currentTarget.dataset.index;
    var key = 'todos[' + i + '].done';
    var patch = {};
    patch[key] = !this.data.todos[i].done;
    this.setData(patch);
  }
});
