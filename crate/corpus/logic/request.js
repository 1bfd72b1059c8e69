function load(page) {
  wx.showLoading({ title: 'loading' });
  wx.request({
    url: 'https://example.com/list?page=' + page,
    method: 'GET',
    success: function (res) {
      page.setData({ list: res.data });
    },
    fail: function (err) {
      wx.showToast({ title: 'failed', icon: 'none' });
    },
    complete: function () {
      wx.hideLoading();
    }
  });
}
