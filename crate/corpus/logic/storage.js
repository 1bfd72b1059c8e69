var KEY = 'history';
function push(item) {
  var list = wx.getStorageSync(KEY) || [];
  list.push(item);
  if (list.length > 20) {
    list.shift();
  }
  wx.setStorageSync(KEY, list);
}
