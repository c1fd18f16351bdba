/** Least-squares slope of log(error) against log(step or spacing). */
export function fitOrder(pairs: Array<[number, number]>): number {
  if (pairs.length < 2) {
    throw new Error(`need at least two points to fit an order, got ${pairs.length}`);
  }
  for (const [x, y] of pairs) {
    if (!(x > 0) || !(y > 0)) {
      throw new Error(`order fit needs positive values, got (${x}, ${y})`);
    }
  }
  const xs = pairs.map(([x]) => Math.log(x));
  const ys = pairs.map(([, y]) => Math.log(y));
  const xMean = xs.reduce((a, b) => a + b, 0) / xs.length;
  const yMean = ys.reduce((a, b) => a + b, 0) / ys.length;
  let num = 0;
  let den = 0;
  for (let i = 0; i < xs.length; i++) {
    num += (xs[i] - xMean) * (ys[i] - yMean);
    den += (xs[i] - xMean) ** 2;
  }
  return num / den;
}
