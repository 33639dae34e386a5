/** Trailing-edge debounce; the wait is capped at 100 ms so slider moves
 * never lag more than one visual beat behind the pointer. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  wait = 100,
): (...args: A) => void {
  const delay = Math.min(wait, 100);
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = undefined;
      fn(...args);
    }, delay);
  };
}
