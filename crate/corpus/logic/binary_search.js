function search(arr, target) {
  var lo = 0;
  var hi = arr.length - 1;
  while (lo <= hi) {
    var mid = Math.floor((lo + hi) / 2);
    if (arr[mid] === target) {
      return mid;
    }
    if (arr[mid] < target) {
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return -1;
}
