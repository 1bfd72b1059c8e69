var seconds = 60;
var timer = setInterval(function () {
  seconds--;
  if (seconds <= 0) {
    clearInterval(timer);
  }
}, 1000);
