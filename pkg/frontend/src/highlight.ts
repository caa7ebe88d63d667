// Minimal PDDL syntax highlighting: escape, then wrap token classes.

function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;");
}

export function highlightPddl(source: string): string {
  const escaped = escapeHtml(source);
  return escaped
    .replace(/(;[^\n]*)/g, '<span class="tok-comment">$1</span>')
    .replace(/(:[a-z-]+)/g, '<span class="tok-keyword">$1</span>')
    .replace(
      /\b(define|domain|problem|and|or|not|imply|forall|exists|when|increase)\b/g,
      '<span class="tok-op">$1</span>',
    )
    .replace(/(\?[\w-]+)/g, '<span class="tok-var">$1</span>');
}
