#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Writes the demo fixture corpus, seed file and two click logs next to this script.

The corpus is small but engineered so that the mapping pipeline with default
settings (>= 10 users, >= 10 % of posters, threshold 0.7) produces:

  american apparel -> americanapparel, apparel, tshirts
  wikipedia        -> encyclopedia, wiki, wikipedia
  youtube          -> converter, flv, youtube
  gmail            -> gmail
  sudoku           -> sudoku
  espn             -> espn            (no seed URL is indexed)
  !!!              -> mapping failure (empty reference tag)
"""

import os

HERE = os.path.dirname(os.path.abspath(__file__))


def month_cycle(months, i):
    return months[i % len(months)]


def ts(month, day=3, hour=10, minute=0):
    return f"{month}-{day:02d}T{hour:02d}:{minute:02d}:00Z"


def users(lo, hi):
    return [f"u{i:03d}" for i in range(lo, hi + 1)]


lines = []


def post(user, month, url, tags, day=3):
    lines.append(f"{ts(month, day)}\t{user}\t{url}\t{','.join(tags)}")


# American Apparel -------------------------------------------------------------
for i, u in enumerate(users(1, 6)):
    tags = ["AmericanApparel", "clothing", "web"] + (["fashion"] if i < 3 else [])
    post(u, "2006-05", "http://www.americanapparel.net/", tags, day=3 + i)
for u, m in zip(users(7, 10), ["2005-11", "2005-12", "2006-01", "2006-02"]):
    post(u, m, "http://americanapparel.net", ["americanapparel", "clothing", "web"])
for i, u in enumerate(users(11, 16)):
    post(u, "2006-05", "https://www.americanapparelstore.com/", ["apparel", "T-Shirts"], day=4 + i)
for u, m in zip(users(17, 22), ["2006-07", "2006-08", "2006-09", "2006-10", "2006-11", "2006-12"]):
    post(u, m, "americanapparelstore.com", ["apparel", "t-shirts"])
for u, m in zip(users(23, 26), ["2006-05", "2006-05", "2006-04", "2006-06"]):
    post(u, m, "www.americanapparel.net", ["American Apparel", "apparel"])
for u, m in zip(users(27, 29), ["2006-05", "2006-05", "2006-03"]):
    post(u, m, "http://www.threadless.com/", ["apparel"])
for u in users(30, 31):
    post(u, "2006-05", "threadless.com", ["t-shirts", "design"])
post("u032", "2006-08", "http://tshirthell.com/", ["tshirts", "funny"])
post("u033", "2006-05", "http://www.allonlinecoupons.com/", ["coupons", "deals"])

# Wikipedia --------------------------------------------------------------------
wiki_months = ["2005-09", "2005-12", "2006-02", "2006-04", "2006-05", "2006-07", "2006-10", "2007-01"]
for i, u in enumerate(users(40, 59)):
    post(u, month_cycle(wiki_months, i), "http://www.wikipedia.org/", ["Wikipedia", "reference", "web"])
for i, u in enumerate(users(60, 74)):
    post(u, month_cycle(wiki_months, i + 3), "http://en.wikipedia.org/", ["wiki", "encyclopedia"])
for i, u in enumerate(users(75, 79)):
    post(u, month_cycle(wiki_months, i + 1), "wikipedia.org", ["wikipedia", "wiki"])
for u in users(80, 82):
    post(u, "2006-05", "http://wikimedia.org/", ["wikimedia"])

# Gmail: mail.google.com is only tagged gmail before the logs start ------------
for i, u in enumerate(users(90, 101)):
    post(u, month_cycle(["2006-04", "2006-05", "2006-06"], i), "https://gmail.com/", ["gmail", "email", "google", "web"])
for i, u in enumerate(users(102, 111)):
    post(u, month_cycle(["2005-10", "2005-12", "2006-01"], i), "http://mail.google.com/mail/", ["email", "google", "web"])
for u in users(112, 113):
    post(u, "2006-02", "http://mail.google.com/", ["gmail"])

# YouTube: keepvid.com only shows up after the logs end --------------------------
for i, u in enumerate(users(120, 134)):
    post(u, month_cycle(["2006-03", "2006-05", "2006-06"], i), "http://www.youtube.com/", ["YouTube", "video", "google", "web"])
for i, u in enumerate(users(135, 146)):
    post(u, month_cycle(["2006-08", "2006-09", "2006-11"], i), "http://keepvid.com/", ["flv", "converter", "video"])

# Sudoku -------------------------------------------------------------------------
for i, u in enumerate(users(150, 164)):
    post(u, month_cycle(["2006-01", "2006-05", "2006-09"], i), "http://www.websudoku.com/", ["sudoku", "puzzle", "games", "web"])
for i, u in enumerate(users(165, 175)):
    post(u, month_cycle(["2006-02", "2006-06"], i), "http://sudoku.com/", ["Sudoku", "reference"])

# ESPN: posted, but no seed URL is in the corpus ---------------------------------
for u in users(180, 182):
    post(u, "2006-05", "http://espn.go.com/", ["ESPN", "sports"])

# Unrelated background -----------------------------------------------------------
noise_tags = ["news", "blog", "design", "music", "tech", "photography", "travel"]
noise_sites = ["slashdot.org", "boingboing.net", "flickr.com", "digg.com", "last.fm", "lifehacker.com"]
noise_months = ["2005-01", "2005-06", "2005-11", "2006-03", "2006-05", "2006-08", "2007-02", "2007-07"]
for i in range(36):
    site = noise_sites[i % len(noise_sites)]
    tags = [noise_tags[i % len(noise_tags)], noise_tags[(i * 3 + 1) % len(noise_tags)]]
    post(f"n{i:02d}", month_cycle(noise_months, i), f"http://{site}/item/{i}", tags, day=1 + i % 27)
# Zone offsets are converted to UTC months: both land in 2006-05.
lines.append("2006-04-30T23:30:00-02:00\tn90\thttp://digg.com/\tnews")
lines.append("2006-06-01T00:30:00+02:00\tn91\thttp://digg.com/\tnews")

# Rejected lines: bad timestamp, nothing left after tag normalization, missing field.
lines.append("yesterday\tn99\thttp://example.com/\tnews")
lines.append("2006-05-03T10:00:00Z\tn99\texample.com\t!!!,  ")
lines.append("2006-05-03T10:00:00Z\tn99\thttp://example.com/")

seeds = [
    ("American Apparel", ["http://www.americanapparel.net/", "http://www.americanapparelstore.com/",
                          "http://shop.americanapparel.net/", "http://en.wikipedia.org/wiki/American_Apparel"]),
    ("Wikipedia", ["http://www.wikipedia.org/", "http://en.wikipedia.org/", "http://wikimedia.org/",
                   "http://de.wikipedia.org/"]),
    ("Gmail", ["https://gmail.com/", "http://mail.google.com/mail/", "http://en.wikipedia.org/wiki/Gmail"]),
    ("YouTube", ["http://www.youtube.com/", "http://keepvid.com/", "http://en.wikipedia.org/wiki/YouTube"]),
    ("Sudoku", ["http://www.websudoku.com/", "http://sudoku.com/", "http://www.sudokuworld.net/"]),
    ("ESPN", ["http://espn.com/", "http://www.espn.co.uk/"]),
    ("!!!", ["http://example.com/"]),
]

msn = [
    ("2006-05-02", "s101", "american apparel", "http://www.americanapparel.net/"),
    ("2006-05-09", "s102", "American Apparel", "americanapparel.net"),
    ("2006-05-11", "s103", "american apparel", "http://www.americanapparelstore.com/"),
    ("2006-05-20", "s104", "AMERICAN APPAREL ", "https://americanapparelstore.com/?src=msn"),
    ("2006-05-03", "s110", "wikipedia", "http://en.wikipedia.org/wiki/Main_Page"),
    ("2006-05-04", "s111", "Wikipedia", "http://www.wikipedia.org/"),
    ("2006-05-05", "s112", "wikipedia", "http://www.wikipedia.org/"),
    ("2006-05-06", "s120", "gmail", "https://gmail.com/"),
    ("2006-05-07", "s121", "gmail", "http://mail.google.com/mail/"),
    ("2006-05-08", "s130", "youtube", "http://www.youtube.com/"),
    ("2006-05-09", "s131", "youtube", "http://keepvid.com/"),
    ("2006-05-10", "s140", "sudoku", "http://www.websudoku.com/"),
    ("2006-05-12", "s141", "sudoku", "http://www.sudokuworld.net/"),
    ("2006-05-13", "s150", "espn", "http://espn.go.com/"),
    ("2006-05-14", "s151", "espn", "http://espn.com/"),
    ("2006-05-15", "s160", "myspace", "http://www.myspace.com/"),
]

aol = [
    ("2006-03-02", "a201", "american apparel", "http://www.americanapparel.net/"),
    ("2006-03-19", "a202", "american apparel", "http://www.americanapparelstore.com/"),
    ("2006-04-07", "a203", "american apparel", "http://www.allonlinecoupons.com/american-apparel"),
    ("2006-05-21", "a204", "american apparel", "http://www.usawear.org/"),
    ("2006-03-10", "a210", "wikipedia", "http://www.wikipedia.org/"),
    ("2006-04-10", "a220", "gmail", "https://gmail.com/"),
    ("2006-04-11", "a221", "gmail", "http://mail.google.com/mail/"),
    ("2006-05-10", "a230", "youtube", "http://www.youtube.com/"),
    ("2006-04-12", "a240", "sudoku", "http://sudoku.com/"),
]


def write(name, rows):
    with open(os.path.join(HERE, name), "w", encoding="utf-8", newline="\n") as f:
        for r in rows:
            f.write(r + "\n")


write("bookmarks.tsv", lines)
write("seeds.tsv", [f"{q}\t{','.join(urls)}" for q, urls in seeds])
write("msn_log.tsv", [f"{d}T12:00:00Z\t{s}\t{q}\t{u}" for d, s, q, u in msn])
write("aol_log.tsv", [f"{d}T12:00:00Z\t{s}\t{q}\t{u}" for d, s, q, u in aol])
