const formatNumber = (n) => {
  n = n.toString();
  if (n[1]) {
    return n;
  }
  return '0' + n;
};

const formatTime = (date) => {
  const year = date.getFullYear();
  const month = date.getMonth() + 1;
  const day = date.getDate();
  return [year, month, day].map(formatNumber).join('/');
};

module.exports = { formatTime: formatTime };
