(function () {
  var hidden = 1;
  return hidden;
})();
(() => {
  console.log('iife');
})();
