function login(cb) {
  wx.login({
    success: (res) => {
      if (res.code) {
        wx.request({ url: '/api/login', data: { code: res.code }, success: cb });
      } else {
        console.log('login failed' + res.errMsg);
      }
    }
  });
}
