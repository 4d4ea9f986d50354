// Detail sidebar markup. Pure string builders so the content is testable
// without a DOM; main.ts assigns the result to innerHTML.

import type { PointDetail } from "./api.js";
import { kindColor } from "./colors.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Allow only http(s) URLs into href/src attributes. */
function safeUrl(raw: string | null): string | null {
  if (!raw) return null;
  if (/^https?:\/\//i.test(raw)) return raw;
  return null;
}

export function sidebarHtml(detail: PointDetail | null): string {
  if (detail === null) {
    return '<p class="sidebar-missing">This item is no longer available.</p>';
  }

  const title = escapeHtml(detail.title);
  const url = safeUrl(detail.url);
  const titleHtml = url
    ? `<a href="${escapeHtml(url)}" target="_blank" rel="noopener noreferrer">${title}</a>`
    : title;

  const thumb = safeUrl(detail.thumbnail_url);
  const thumbHtml = thumb
    ? `<img class="sidebar-thumb" src="${escapeHtml(thumb)}" alt="">`
    : '<div class="sidebar-thumb sidebar-thumb-empty">no preview</div>';

  const channel = detail.channel_or_artist
    ? `<p class="sidebar-channel">${escapeHtml(detail.channel_or_artist)}</p>`
    : "";

  const badge = `<span class="kind-badge" style="background:${kindColor(detail.kind)}">${escapeHtml(
    detail.kind,
  )}</span>`;

  return [
    thumbHtml,
    `<h2 class="sidebar-title">${titleHtml}</h2>`,
    channel,
    `<p class="sidebar-meta">${badge} <time>${escapeHtml(detail.timestamp)}</time></p>`,
    `<pre class="sidebar-payload">${escapeHtml(detail.text_payload)}</pre>`,
  ].join("\n");
}
