#!/usr/bin/env python3
"""Writes the synthetic knowledge-graph fixtures used by the linking tests.

The table below stands in for Wikidata and Swedish Wikipedia. Responses are
shaped like the real API answers (wbsearchentities, wbgetentities, query
extracts) and stored under the request key the C++ client computes:
sha256 of "GET <url>\n" plus one "<name>=<value>\n" line per sorted param.
Apart from Q1754 (Stockholm) the QIDs are placeholders.

Outputs: fixtures/api/ and fixtures/linking/{entries,gold}_{first,second}.jsonl
"""

import hashlib
import json
import pathlib
import shutil

ROOT = pathlib.Path(__file__).resolve().parent.parent
WD = "https://www.wikidata.org/w/api.php"
WP = "https://sv.wikipedia.org/w/api.php"
EARTH = "http://www.wikidata.org/entity/Q2"
MOON = "http://www.wikidata.org/entity/Q405"

items = {}      # qid -> dict(label, desc, title, extract, coord, globe)
searches = {}   # search string -> [qid]
_next = [7000001]


def item(label, desc="", extract=None, coord=None, globe=EARTH, qid=None, title=None):
    if qid is None:
        qid = "Q%d" % _next[0]
        _next[0] += 1
    items[qid] = dict(label=label, desc=desc, extract=extract, coord=coord, globe=globe,
                      title=title or (label if extract is not None else None))
    return qid


def search(term, *qids):
    searches[term] = list(qids)


# place: (headword, ed1 text or None, ed2 text or None, gold qid)
places = []


def place(headword, ed1, ed2, hits, gold, ed2_headword=None):
    places.append(dict(hw=headword, hw2=ed2_headword or headword, ed1=ed1, ed2=ed2, gold=gold))
    search(headword, *hits)


def swedish_town(name, county, note, lat, lon, kind="stad", extra_hits=()):
    q = item(name, f"tätort i {county} län, Sverige",
             f"{name} är en tätort och tidigare {kind} i {county} län, {note}. "
             f"{name} är centralort i {name} kommun.", (lat, lon))
    ed1 = f"{name}, {kind} i {county} län, {note}. 0 inv. (1880)."
    ed2 = f"{name}, {kind} i {county} län, {note}. 0 inv. (1910)."
    place(name, ed1, ed2, [q, *extra_hits], q)
    return q


# plain towns, the correct item first
swedish_town("Arboga", "Västmanlands", "vid Arbogaån, med gevärsfaktori", 59.3939, 15.8388)
swedish_town("Askersund", "Örebro", "vid norra spetsen av Vättern", 58.8800, 14.9000)
swedish_town("Borgholm", "Kalmar", "på Ölands västra kust, med Borgholms slottsruin", 56.8794, 16.6560)
swedish_town("Eksjö", "Jönköpings", "med regementsmöte på Ränneslätt", 57.6667, 14.9667)
swedish_town("Enköping", "Uppsala", "trädgårdsstad vid Mälaren", 59.6356, 17.0776)
swedish_town("Filipstad", "Värmlands", "bergslagsstad med järnhandel", 59.7128, 14.1681)
swedish_town("Hedemora", "Kopparbergs", "den äldsta staden i Dalarna", 60.2790, 15.9870)
swedish_town("Hudiksvall", "Gävleborgs", "med trävaruexport vid Hudiksvallsfjärden", 61.7289, 17.1036)
swedish_town("Laholm", "Hallands", "vid Lagans utlopp i Laholmsbukten", 56.5122, 13.0436)
swedish_town("Piteå", "Norrbottens", "med sågverk och hamn vid Piteälven", 65.3172, 21.4794)
swedish_town("Ronneby", "Blekinge", "med brunnsanstalt och emaljfabrik", 56.2094, 15.2760)
swedish_town("Sala", "Västmanlands", "bergsstad med Sala silvergruva", 59.9200, 16.6000)
swedish_town("Strängnäs", "Södermanlands", "stiftsstad vid Mälaren med domkyrka", 59.3775, 17.0312)
swedish_town("Trosa", "Södermanlands", "liten kuststad vid Trosaån", 58.8969, 17.5500)
swedish_town("Vimmerby", "Kalmar", "med hästmarknader i Sevede", 57.6667, 15.8500)
swedish_town("Åmål", "Älvsborgs", "vid Vänern med trävaruhandel", 59.0500, 12.7000)
swedish_town("Mariestad", "Skaraborgs", "residensstad vid Vänern", 58.7097, 13.8237)
swedish_town("Hjo", "Skaraborgs", "badort vid Vättern med vattenkuranstalt", 58.3044, 14.2861)
swedish_town("Söderköping", "Östergötlands", "vid Göta kanal, med brunn", 58.4800, 16.3240)

# same-name distractors that come first in search order
ship = item("Kalmar", "svenskt örlogsfartyg sjösatt 1890")
surname = item("Kalmar", "efternamn")
swedish_town("Kalmar", "Kalmar", "residensstad vid Kalmarsund, med slott och domkyrka",
             56.6634, 16.3568)
search("Kalmar", ship, surname, searches["Kalmar"][0])

lund_no = item("Lund", "kommun i Rogaland fylke, Norge",
               "Lund är en kommun i Rogaland fylke i Norge, med centralorten Moi.",
               (58.4500, 6.5700), title="Lunds kommun, Norge")
lund = swedish_town("Lund", "Malmöhus", "stiftsstad med universitet och domkyrka",
                    55.7047, 13.1910)
search("Lund", lund_no, lund)

# Stockholm: the one real QID
sthlm = item("Stockholm", "Sveriges huvudstad",
             "Stockholm är Sveriges huvudstad och residensstad i Stockholms län, "
             "belägen där Mälaren möter Saltsjön, med kungliga slottet och riksdagen.",
             (59.3293, 18.0686), qid="Q1754")
sthlm_song = item("Stockholm", "sång av Lasse Dahlquist")
place("Stockholm",
      "Stockholm, Sveriges hufvudstad och residensstad i Stockholms län, där Mälaren "
      "möter Saltsjön, med kungliga slottet och riksdagen. 0 inv. (1880).",
      "Stockholm, Sveriges huvudstad och residensstad i Stockholms län, där Mälaren "
      "möter Saltsjön, med kungliga slottet och riksdagen. 0 inv. (1910).",
      [sthlm, sthlm_song], sthlm)

uppsala = swedish_town("Uppsala", "Uppsala", "stiftsstad och universitetsstad vid Fyrisån",
                       59.8586, 17.6389)

# Öved: the parish item has no coordinates and only a short description;
# the castle has an article that mentions the parish, so it wins
oved_parish = item("Öved", "socken i Skåne", coord=None)
oved_castle = item("Övedsklosters slott", "slott i Sjöbo kommun",
                   "Övedsklosters slott är ett slott i Öveds socken i Sjöbo kommun i Skåne, "
                   "vid Vombsjön i Frosta härad i Malmöhus län, uppfört på en gammal klostertomt.",
                   (55.6967, 13.6300))
place("Öved",
      "Öved, socken i Malmöhus län, Frosta härad, vid Vombsjön, med Övedsklosters "
      "slott på en gammal klostertomt. 0 inv. (1880).",
      "Öved, socken i Malmöhus län, Frosta härad, vid Vombsjön, med Övedsklosters "
      "slott på en gammal klostertomt. 0 inv. (1910).",
      [oved_parish, oved_castle], oved_parish)
items[oved_parish]["gold_coord"] = (55.7050, 13.6430)

# Qvenneberga: no hits under the old spelling, the item is found as Kvenneberga
kvenne = item("Kvenneberga", "socken i Jönköpings län",
              "Kvenneberga är en socken i Småland, ingick i Östbo härad i Jönköpings län, "
              "annex till Värnamo.", (57.0500, 14.0500))
search("Qvenneberga")
places.append(dict(hw="Qvenneberga", hw2="Kvenneberga",
                   ed1="Qvenneberga, socken i Jönköpings län, Östbo härad, annex till Värnamo. 0 inv.",
                   ed2="Kvenneberga, socken i Jönköpings län, Östbo härad, annex till Värnamo. 0 inv.",
                   gold=kvenne))
search("Kvenneberga", kvenne)

# Nora: a namesake parish far to the north has the closer description, so
# the link is wrong and outside the radius
nora_se = item("Nora", "tätort i Örebro län")
nora_far = item("Nora socken", "socken i Ångermanland",
                "Nora är en socken i Västernorrlands län, vid Norafjärden, med järnväg till "
                "Kramfors. Nora ingår i Nora tingslag i Västernorrlands län.", (62.9500, 17.9300))
place("Nora",
      "Nora, stad i Örebro län, vid Norasjön, med järnväg till Ervalla. Nora ingår i Nora bergslag i Örebro län.",
      None, [nora_far, nora_se], nora_se)
items[nora_se]["gold_coord"] = (59.5197, 15.0394)

# Mora: only a terse description, below the threshold
mora = item("Mora", "tätort i Dalarnas län")
place("Mora",
      "Mora, socken i Kopparbergs län, vid Siljans nordvästra strand, känd för Gustav "
      "Vasas äventyr. 0 inv. (1880).",
      None, [mora], mora)
items[mora]["gold_coord"] = (61.0070, 14.5430)

# edition-2 additions abroad
for name, country, note, lat, lon in [
    ("Minneapolis", "Minnesota, USA", "vid Mississippifloden, med många svenska invandrare",
     44.9778, -93.2650),
    ("Chicago", "Illinois, USA", "vid Michigansjön, med stor svensk befolkning",
     41.8781, -87.6298),
    ("Bergen", "Norge", "hamnstad vid Byfjorden, med hanseatisk historia", 60.3913, 5.3221),
]:
    q = item(name, f"stad i {country}",
             f"{name} är en stad i {country}, {note}.", (lat, lon))
    place(name, None, f"{name}, stad i {country}, {note}. 0 inv. (1910).", [q], q)

# a lunar crater sharing a name, never linked
moon = item("Kalmar", "krater på månen", coord=(10.0, 20.0), globe=MOON)


def canonical(url, params):
    return "GET " + url + "\n" + "".join(f"{k}={params[k]}\n" for k in sorted(params))


def main():
    api = ROOT / "fixtures" / "api"
    if api.exists():
        shutil.rmtree(api)
    (api / "responses").mkdir(parents=True)
    index = {}

    def store(url, params, body):
        key = hashlib.sha256(canonical(url, params).encode()).hexdigest()
        f = f"responses/{key}.json"
        (api / f).write_text(json.dumps(body, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
        index[key] = {"url": url, "params": {k: params[k] for k in sorted(params)}, "file": f}

    for term, qids in searches.items():
        params = {"action": "wbsearchentities", "search": term, "language": "sv", "uselang": "sv",
                  "type": "item", "limit": "5", "format": "json"}
        store(WD, params, {"searchinfo": {"search": term}, "search": [
            {"id": q, "label": items[q]["label"], "description": items[q]["desc"]} for q in qids[:5]],
            "success": 1})
    for qid, it in items.items():
        claims = {}
        if it["coord"]:
            lat, lon = it["coord"]
            claims["P625"] = [{"mainsnak": {"snaktype": "value", "property": "P625", "datavalue": {
                "value": {"latitude": lat, "longitude": lon, "altitude": None, "precision": 0.0001,
                          "globe": it["globe"]}, "type": "globecoordinate"}}, "type": "statement",
                "rank": "normal"}]
        ent = {"type": "item", "id": qid, "claims": claims,
               "descriptions": {"sv": {"language": "sv", "value": it["desc"]}} if it["desc"] else {},
               "sitelinks": {"svwiki": {"site": "svwiki", "title": it["title"]}} if it["title"] else {}}
        params = {"action": "wbgetentities", "ids": qid, "props": "claims|descriptions|sitelinks",
                  "languages": "sv", "sitefilter": "svwiki", "format": "json"}
        store(WD, params, {"entities": {qid: ent}, "success": 1})
        if it["title"]:
            params = {"action": "query", "prop": "extracts", "exintro": "1", "explaintext": "1",
                      "redirects": "1", "titles": it["title"], "format": "json", "formatversion": "2"}
            store(WP, params, {"batchcomplete": True, "query": {"pages": [
                {"pageid": int(qid[1:]) % 100000, "ns": 0, "title": it["title"], "extract": it["extract"]}]}})

    (api / "index.json").write_text(json.dumps(
        {"format": "encyclink-api-fixtures", "version": 1,
         "entries": {k: index[k] for k in sorted(index)}}, ensure_ascii=False, indent=1) + "\n",
        encoding="utf-8")

    out = ROOT / "fixtures" / "linking"
    out.mkdir(parents=True, exist_ok=True)
    for ed, field, hwfield in (("first", "ed1", "hw"), ("second", "ed2", "hw2")):
        entries, gold = [], []
        for n, p in enumerate(places):
            text = p[field]
            if text is None:
                continue
            hw = p[hwfield]
            eid = f"{ed}/{hw[0]}/{n + 1}/0"
            entries.append({"id": eid, "edition": ed, "volume": hw[0], "page": str(n + 1),
                            "headword": hw, "strategy": "bold", "is_crossref": False,
                            "crossref_target": None, "is_location": True,
                            "truncated_text": text[:200], "text": text})
            g = items[p["gold"]]
            lat, lon = g.get("gold_coord") or g["coord"]
            gold.append({"entry_id": eid, "qid": p["gold"], "lat": lat, "lon": lon})
        with open(out / f"entries_{ed}.jsonl", "w", encoding="utf-8") as f:
            for e in entries:
                f.write(json.dumps(e, ensure_ascii=False) + "\n")
        with open(out / f"gold_{ed}.jsonl", "w", encoding="utf-8") as f:
            for g in gold:
                f.write(json.dumps(g, ensure_ascii=False) + "\n")
        print(ed, len(entries), "entries")
    print(len(index), "responses")


if __name__ == "__main__":
    main()
