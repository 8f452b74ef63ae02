#!/usr/bin/env python3
"""Writes fixtures/crossref/entries100.jsonl and gold100.jsonl.

Every entry carries a hand label: the word it redirects to (or nothing) and
the id of the entry a reader would follow. Three redirects are written in
ways the " Se " rule cannot see (lowercase "se", or longer than the limit).
"""
import json
import os

# (headword, text, gold target word or None, headword the reader means or None)
# When the meant headword occurs twice, the label names the occurrence with
# a suffix "#n" (0-based among equal headwords).
ROWS = [
    ("Abborre", "Abborre, en sötvattensfisk av abborrfamiljen, allmän i Sveriges sjöar och vattendrag.", None, None),
    ("Abo", "Abo. Se Åbo.", "Åbo", "Åbo"),
    ("Åbo", "Åbo, stad i Finland, vid Aura ås mynning, fordom landets huvudstad och säte för universitetet.", None, None),
    ("Adel", "Adel, en samhällsklass med ärftliga privilegier, i Sverige organiserad genom riddarhuset.", None, None),
    ("Adelsbrev", "Adelsbrev. Se Adel.", "Adel", "Adel"),
    ("Akademi", "Akademi, benämning på lärda samfund och på vissa högre läroanstalter.", None, None),
    ("Akvavit", "Akvavit. Se Brännvin.", "Brännvin", "Brännvin"),
    ("Alun", "Alun, ett dubbelsalt av svavelsyrad lerjord och kali, användes vid färgning.", None, None),
    ("Alunskiffer", "Alunskiffer. Se Alun och Skiffer.", "Alun", "Alun"),
    ("Amiral", "Amiral, befälhavare över en flotta eller en flottavdelning.", None, None),
    ("Amiralitet", "Amiralitet. Se Amiral.", "Amiral", "Amiral"),
    ("Ankare", "Ankare, redskap av järn, varmed fartyg fästas vid botten.", None, None),
    ("Apotek", "Apotek, inrättning för beredning och försäljning av läkemedel.", None, None),
    ("Apotekare", "Apotekare. Se Apotek.", "Apotek", "Apotek"),
    ("Arboga", "Arboga, stad i Västmanlands län, vid Arbogaån, med gevärsfaktori.", None, None),
    ("Arbogaån", "Arbogaån. Se Arboga.", "Arboga", "Arboga"),
    ("Astronomi", "Astronomi, vetenskapen om himlakropparna, deras rörelser och natur.", None, None),
    ("Bajaset", "Bajaset, stad i turkiska Armenien, vid gränsen mot Persien, med en gammal borg.", None, None),
    ("Bajasid", "Bajasid, stad. Se Bajaset.", "Bajaset", "Bajaset"),
    ("Bajasid", "Bajasid, namn på flera turkiska sultaner av Osmans ätt; den förste regerade 1389–1402.", None, None),
    ("Bajesid", "Bajesid, turkiska sultaner. Se Bajasid.", "Bajasid", "Bajasid#1"),
    ("Barometer", "Barometer, instrument för mätning av luftens tryck, uppfunnet av Torricelli 1643.", None, None),
    ("Bergsbruk", "Bergsbruk. Se Bergsväsen.", "Bergsväsen", "Bergsväsen"),
    ("Bergsväsen", "Bergsväsen, sammanfattande namn på allt som rör gruvdrift och metallframställning.", None, None),
    ("Bly", "Bly, en blågrå, mjuk och tung metall, som utvinnes ur blyglans.", None, None),
    ("Blyglans", "Blyglans. Se Bly.", "Bly", "Bly"),
    ("Bränvin", "Bränvin. Se Brännvin.", "Brännvin", "Brännvin"),
    ("Brännvin", "Brännvin, en genom destillation vunnen spritdryck av säd eller potatis.", None, None),
    ("Bro", "Bro, byggnad för att föra en väg över ett vattendrag eller en dal.", None, None),
    ("Brygga", "Brygga. Se Bro och Hamn.", "Bro", "Bro"),
    ("Celsius", "Celsius, Anders, astronom, f. 1701 i Uppsala, d. 1744. Införde den hundragradiga termometern.", None, None),
    ("Cider", "Cider, en jäst dryck av äppelmust, vanlig i Normandie och England.", None, None),
    ("Dagg", "Dagg, vattenånga som vid avkylning om natten fälles på marken och växterna.", None, None),
    ("Daggmask", "Daggmask. Se Mask.", "Mask", None),
    ("Damm", "Damm, byggnad som uppdämmer vatten i en å eller bäck.", None, None),
    ("Diakon", "Diakon, kyrklig tjänare, i fornkyrkan biträde åt biskopen vid fattigvården.", None, None),
    ("Ek", "Ek, ett lövträd med hårt virke, allmänt i södra Sverige.", None, None),
    ("Ekollon", "Ekollon. Se Ek.", "Ek", "Ek"),
    ("Elg", "Elg. Se Älg.", "Älg", "Älg"),
    ("Älg", "Älg, det största djuret av hjortfamiljen, allmän i Sveriges skogar.", None, None),
    ("Fackla", "Fackla, en brinnande bloss av beckat trä eller vax.", None, None),
    ("Falun", "Falun, stad och residensstad i Kopparbergs län, med Falu koppargruva.", None, None),
    ("Falu gruva", "Falu gruva. Se Falun.", "Falun", "Falun"),
    ("Fisk", "Fisk, ryggradsdjur som lever i vatten och andas med gälar.", None, None),
    ("Fiske", "Fiske. Se Fisk.", "Fisk", "Fisk"),
    ("Flagga", "Flagga, ett tygstycke med bestämda färger som tecken för ett land eller en förening.", None, None),
    ("Gädda", "Gädda, en rovfisk i sötvatten, med långsträckt kropp och stort gap.", None, None),
    ("Glas", "Glas, en genomskinlig massa som framställes genom smältning av kiselsyra med alkalier.", None, None),
    ("Glasbruk", "Glasbruk. Se Glas.", "Glas", "Glas"),
    ("Granit", "Granit, en kornig bergart av fältspat, kvarts och glimmer, allmän i Sverige.", None, None),
    ("Guld", "Guld, en gul, glänsande ädel metall, som ej angripes av luft eller vatten.", None, None),
    ("Hamn", "Hamn, skyddad vattenplats där fartyg kunna ligga säkert och lasta.", None, None),
    ("Hamnstad", "Hamnstad. Se Hamn.", "Hamn", "Hamn"),
    ("Hassel", "Hassel, en buske med ätliga nötter, allmän i södra och mellersta Sverige.", None, None),
    ("Hö", "Hö, torkat gräs som användes till foder för boskapen vintertid.", None, None),
    ("Järn", "Järn, den viktigaste av alla nyttiga metaller, som utvinnes ur malm i masugnar.", None, None),
    ("Järnmalm", "Järnmalm. Se Järn och Malm.", "Järn", "Järn"),
    ("Kalk", "Kalk, bränd kalksten som användes till murbruk och gödning.", None, None),
    ("Kalksten", "Kalksten. Se Kalk.", "Kalk", "Kalk"),
    ("Kol", "Kol, ett grundämne som förekommer rent i diamant och grafit och orent i stenkol.", None, None),
    ("Koks", "Koks. Se Kol.", "Kol", "Kol"),
    ("Kolmila", "Kolmila, se Kol.", "Kol", "Kol"),
    ("Koppar", "Koppar, en röd metall som utvinnes särskilt vid Falun och Atvidaberg.", None, None),
    ("Krut", "Krut, en blandning av salpeter, svavel och kol, använd till skjutvapen.", None, None),
    ("Krutfabrik", "Krutfabrik. Se Krut.", "Krut", "Krut"),
    ("Lax", "Lax, en fisk av laxfamiljen, som vandrar från havet upp i älvarna för att leka.", None, None),
    ("Leijonhufvud", "Leijonhufvud, adlig, friherrlig och grevlig ätt, härstammande från Småland. Se vidare Sture.", None, None),
    ("Lin", "Lin, en växt vars stjälkar lämna spånadsämne och vars frön giva linolja.", None, None),
    ("Linolja", "Linolja. Se Lin.", "Lin", "Lin"),
    ("Malm", "Malm, mineral ur vilket metall med fördel kan utvinnas.", None, None),
    ("Mask", "Mask, ansiktsskydd eller förklädnad av tyg, läder eller papp.", None, None),
    ("Mjölk", "Mjölk, den vätska som honorna av däggdjuren avsöndra till ungarnas näring.", None, None),
    ("Nervsjukdomar", "Nervsjukdomar, sjukdomar i nervsystemet, såsom förlamningar, kramper och neuralgier.", None, None),
    ("Nervtumör", "Nervtumör. Se Nervsjukdomar.", "Nervsjukdomar", "Nervsjukdomar"),
    ("Ost", "Ost, ett födoämne som beredes av mjölkens ostämne genom löpe.", None, None),
    ("Ostlöpe", "Ostlöpe. Se Ost och Mjölk.", "Ost", "Ost"),
    ("Pappersbruk", "Pappersbruk, fabrik för tillverkning av papper av lump eller trämassa; om tillverkningen i övrigt se Papper.", "Papper", None),
    ("Potatis", "Potatis, en knölväxt från Sydamerika, odlad som födoämne och till brännvinsbränning.", None, None),
    ("Psalm", "Psalm, andlig sång för församlingens gudstjänst.", None, None),
    ("Psalmbok", "Psalmbok. Se Psalm.", "Psalm", "Psalm"),
    ("Råg", "Råg, ett sädesslag som odlas allmänt i norra Europa.", None, None),
    ("Rågmjöl", "Rågmjöl. Se Råg.", "Råg", "Råg"),
    ("Salpeter", "Salpeter, ett salt som användes till krut och gödning.", None, None),
    ("Segel", "Segel, duk som uppspännes på ett fartyg för att fånga vinden.", None, None),
    ("Sill", "Sill, en havsfisk av sillfamiljen, som fångas i stor mängd vid Bohusläns kust.", None, None),
    ("Sillfiske", "Sillfiske. Se Sill och Fiske.", "Sill", "Sill"),
    ("Silver", "Silver, en vit, glänsande ädel metall, som i Sverige utvinnes vid Sala.", None, None),
    ("Skiffer", "Skiffer, en bergart som lätt klyves i tunna skivor.", None, None),
    ("Stenkol", "Stenkol, ett brännbart mineral bildat av forntida växtlämningar i jordens inre.", None, None),
    ("Stenkolsgruva", "Stenkolsgruva. Se Stenkol.", "Stenkol", "Stenkol"),
    ("Statskalender", "Statskalender, förteckning över rikets ämbetsverk och deras tjänstemän.", None, None),
    ("Sveriges statskalender", "Sveriges statskalender, den officiella förteckningen över rikets ämbetsmän. Se Statskalender.", "Statskalender", "Statskalender"),
    ("Sture", "Sture, namn på flera svenska släkter, av vilka tre riksföreståndare utgått.", None, None),
    ("Tjära", "Tjära, en mörk vätska som vinnes genom torrdestillation av trä.", None, None),
    ("Tjärbränning", "Tjärbränning. Se Tjära.", "Tjära", "Tjära"),
    ("Ull", "Ull, fårens hår, ett av de viktigaste spånadsämnena.", None, None),
    ("Vapen", "Vapen, redskap till anfall eller försvar.", None, None),
    ("Vapensköld", "Vapensköld. Se Vapen.", "Vapen", "Vapen"),
    ("Öl", "Öl, en jäst dryck av malt och humle.", None, None),
    ("Ölbryggeri", "Ölbryggeri. Se Öl.", "Öl", "Öl"),
]


def main():
    root = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures", "crossref")
    os.makedirs(root, exist_ok=True)
    assert len(ROWS) == 100, len(ROWS)
    ids = []
    seen = {}
    by_headword = {}
    for i, (hw, text, _, _) in enumerate(ROWS):
        page = f"{i // 10 + 1:04d}"
        ident = f"second/X/{page}/{i % 10}"
        ids.append(ident)
        n = seen.get(hw, 0)
        seen[hw] = n + 1
        by_headword[f"{hw}#{n}"] = ident
    with open(os.path.join(root, "entries100.jsonl"), "w", encoding="utf-8") as f:
        for ident, (hw, text, _, _) in zip(ids, ROWS):
            _, vol, page, _ = ident.split("/")
            rec = {"id": ident, "edition": "second", "volume": vol, "page": page, "headword": hw,
                   "strategy": "bold", "text": text}
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    with open(os.path.join(root, "gold100.jsonl"), "w", encoding="utf-8") as f:
        for ident, (hw, text, target, meant) in zip(ids, ROWS):
            resolved = None
            if meant is not None:
                resolved = by_headword[meant if "#" in meant else meant + "#0"]
            rec = {"source_id": ident, "target_word": target, "resolved_id": resolved}
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
