Page({
  onPullDownRefresh: function () {
    this.reload();
    wx.stopPullDownRefresh();
  },
  onReachBottom: function () {
    if (!this.data.noMore) {
      this.loadMore();
    }
  },
  onShareAppMessage: function () {
    return { title: 'Share', path: '/pages/index/index' };
  }
});
