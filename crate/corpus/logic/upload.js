function chooseAndUpload() {
  wx.chooseImage({
    count: 1,
    success: function (res) {
      var path = res.tempFilePaths[0];
      wx.uploadFile({ url: '/upload', filePath: path, name: 'file' });
    }
  });
}
