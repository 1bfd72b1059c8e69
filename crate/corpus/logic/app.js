// app entry
App({
  globalData: { userInfo: null, version: '1.0.3' },
  onLaunch: function () {
    var logs = wx.getStorageSync('logs') || [];
    logs.unshift(Date.now());
    wx.setStorageSync('logs', logs);
  }
});
