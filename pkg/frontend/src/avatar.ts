/** Seven static avatar expressions rendered as inline SVG, keyed by id. */

function face(mouth: string, extras = ""): string {
  return (
    `<svg viewBox="0 0 100 100" xmlns="http://www.w3.org/2000/svg">` +
    `<circle cx="50" cy="50" r="45" fill="#ffd877" stroke="#46391a" stroke-width="3"/>` +
    `<circle cx="35" cy="40" r="5" fill="#46391a"/>` +
    `<circle cx="65" cy="40" r="5" fill="#46391a"/>` +
    mouth +
    extras +
    `</svg>`
  );
}

const line = (d: string) =>
  `<path d="${d}" fill="none" stroke="#46391a" stroke-width="4" stroke-linecap="round"/>`;

export const AVATAR_SVG: Record<number, string> = {
  0: face(line("M 35 68 H 65")), // neutral
  1: face(
    `<ellipse cx="50" cy="70" rx="9" ry="12" fill="#46391a"/>`,
    line("M 28 28 Q 35 22 42 28") + line("M 58 28 Q 65 22 72 28"),
  ), // surprise
  2: face(
    `<ellipse cx="50" cy="72" rx="10" ry="7" fill="#46391a"/>`,
    line("M 28 30 L 42 26") + line("M 72 30 L 58 26"),
  ), // fear
  3: face(
    line("M 35 74 Q 50 62 65 74"),
    `<path d="M 68 48 q 4 8 0 10 q -4 -2 0 -10" fill="#3b7dd8"/>`,
  ), // sadness
  4: face(line("M 32 64 Q 50 82 68 64")), // joy
  5: face(
    line("M 34 72 Q 50 66 66 74"),
    line("M 28 32 L 42 30") + `<circle cx="50" cy="55" r="2" fill="#6a8f3c"/>`,
  ), // disgust
  6: face(
    line("M 35 74 Q 50 66 65 74"),
    line("M 28 26 L 42 32") + line("M 72 26 L 58 32"),
  ), // anger
};

export function avatarSvg(emotionId: number): string {
  return AVATAR_SVG[emotionId] ?? AVATAR_SVG[0];
}
