wx.cloud.database().collection('todos').where({ done: false }).get().then((res) => {
  console.log(res.data.length);
});
