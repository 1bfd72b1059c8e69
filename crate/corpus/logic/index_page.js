const app = getApp();

Page({
  data: {
    motto: 'Hello',
    count: 0,
    items: [1, 2, 3]
  },
  onLoad: function (options) {
    if (options.id) {
      this.setData({ id: options.id });
    }
  },
  onTap: function () {
    this.setData({ count: this.data.count + 1 });
  }
});
