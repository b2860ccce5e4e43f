/**
 * Client-side prompt template rendering, kept byte-compatible with the
 * server's renderer so the preview pane shows exactly what will be sent.
 */

export class TemplateIssue extends Error {
  constructor(
    public kind: "missing" | "unbalanced",
    public detail: string,
    public position: number,
  ) {
    super(kind === "missing" ? `placeholder {${detail}} has no value` : `unbalanced brace at ${position}`);
  }
}

const IDENT = /^[A-Za-z_][A-Za-z0-9_]*$/;

function stringify(value: unknown): string {
  if (typeof value === "string") return value;
  if (value === null || value === undefined) return "";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") {
    if (Number.isInteger(value) && Math.abs(value) < 1e16) return String(value);
    return String(value);
  }
  return JSON.stringify(value);
}

/** Placeholder names in order of first appearance; throws on bad braces. */
export function placeholderNames(text: string): string[] {
  const names: string[] = [];
  renderText(text, null, names);
  return names;
}

function renderText(
  text: string,
  record: Record<string, unknown> | null,
  sink?: string[],
): string {
  let out = "";
  let i = 0;
  while (i < text.length) {
    const ch = text[i];
    if (ch === "{") {
      if (text[i + 1] === "{") {
        out += "{";
        i += 2;
        continue;
      }
      const end = text.indexOf("}", i + 1);
      if (end === -1) throw new TemplateIssue("unbalanced", text.slice(i), i);
      const name = text.slice(i + 1, end);
      if (!IDENT.test(name)) throw new TemplateIssue("unbalanced", name, i);
      if (sink && !sink.includes(name)) sink.push(name);
      if (record !== null) {
        if (!(name in record)) throw new TemplateIssue("missing", name, i);
        out += stringify(record[name]);
      }
      i = end + 1;
    } else if (ch === "}") {
      if (text[i + 1] === "}") {
        out += "}";
        i += 2;
        continue;
      }
      throw new TemplateIssue("unbalanced", "}", i);
    } else {
      out += ch;
      i += 1;
    }
  }
  return out;
}

export interface FewShot {
  example_template: string;
  examples: Record<string, unknown>[];
  separator: string;
}

export function renderTemplate(
  text: string,
  record: Record<string, unknown>,
  fewShot?: FewShot | null,
): string {
  const parts: string[] = [];
  if (fewShot) {
    for (const example of fewShot.examples) {
      parts.push(renderText(fewShot.example_template, example));
    }
  }
  parts.push(renderText(text, record));
  return parts.join(fewShot ? fewShot.separator : "");
}

/** Placeholders that the record cannot fill (for pre-send validation). */
export function unresolvedPlaceholders(
  text: string,
  record: Record<string, unknown>,
): string[] {
  return placeholderNames(text).filter((name) => !(name in record));
}
