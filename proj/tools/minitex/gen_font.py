#!/usr/bin/env python3
"""Generate the 1-bit glyph table used by minitex from DejaVu Serif.

Run once; the output (font_data.inc) is committed so builds do not depend on
system fonts.
"""
import sys
from PIL import Image, ImageDraw, ImageFont

FONT = "/usr/share/fonts/truetype/dejavu/DejaVuSerif.ttf"
SIZES = [21, 15]  # text, script

chars = [chr(c) for c in range(33, 127)]
chars += [chr(c) for c in range(0x3B1, 0x3CA) if c != 0x3C2]  # alpha..omega
chars += [chr(c) for c in range(0x391, 0x3AA) if c not in (0x3A2,)]  # Alpha..Omega
chars += list("≤≥≠∈∉∑∏·×→←↔⇒≡≜≐∞∂∇≈∼±∀∃∫√ˆ¯˜…∪∩⊂⊆∅ℓ′∗∘⟨⟩‖")


def glyph(font, ch):
    l, t, r, b = font.getbbox(ch)
    adv = int(round(font.getlength(ch)))
    w, h = max(r - l, 1), max(b - t, 1)
    img = Image.new("L", (w, h), 0)
    ImageDraw.Draw(img).text((-l, -t), ch, font=font, fill=255)
    ascent = font.getmetrics()[0]
    rows = []
    for y in range(h):
        bits = "".join("1" if img.getpixel((x, y)) >= 128 else "0" for x in range(w))
        rows.append(bits)
    # trim empty rows/cols
    while rows and "1" not in rows[0]:
        rows.pop(0); t += 1
    while rows and "1" not in rows[-1]:
        rows.pop()
    if not rows:
        return adv, 0, 0, 0, 0, []
    left_trim = min(r.index("1") for r in rows if "1" in r)
    right_trim = min(len(r) - r.rindex("1") - 1 for r in rows if "1" in r)
    rows = [r[left_trim:len(r) - right_trim] for r in rows]
    return adv, l + left_trim, ascent - t, len(rows[0]), len(rows), rows


def main(out):
    with open(out, "w") as f:
        f.write("// Generated by gen_font.py from DejaVu Serif. Do not edit.\n")
        for si, size in enumerate(SIZES):
            font = ImageFont.truetype(FONT, size)
            asc, desc = font.getmetrics()
            f.write(f"// size {size}: ascent {asc} descent {desc}\n")
            for ch in chars:
                adv, left, top, w, h, rows = glyph(font, ch)
                data = ",".join('"' + r + '"' for r in rows) if rows else ""
                f.write(f"{{{si},0x{ord(ch):04X},{adv},{left},{top},{w},{h},{{{data}}}}},\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "font_data.inc")
