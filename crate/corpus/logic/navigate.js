Page({
  goDetail: function (e) {
    var id = e.currentTarget.dataset.id;
    wx.navigateTo({ url: '/pages/detail/detail?id=' + id });
  },
  goBack: function () {
    wx.navigateBack({ delta: 1 });
  }
});
