"""Dev utility: regenerate the shipped fixture profiles (run from repo root).

Profiles are aligned to the toy fixture graph: affirmed attributes are the
gold disease's attribute names, denials cover the sibling diseases' unique
attributes plus cross-family entry points, and background entries carry the
cause/risk attributes (plus unmappable filler to vary the grounding ratio).
"""

import json
from pathlib import Path

OUT = Path("src/graphdx/fixtures/profiles")

FLAVOR = {
    "moderate": ["appendectomy years ago", "retired schoolteacher", "lives with family"],
    "low": [
        "appendectomy years ago",
        "retired schoolteacher",
        "lives with family",
        "enjoys gardening on weekends",
        "two small dogs at home",
        "recently moved apartments",
        "prefers herbal remedies",
    ],
}


def profile(idx, disease_key, age, gender, chief, affirmed, denied, background, flavor=None):
    bg = {"past_medical": [], "family": [], "social": []}
    for slot, entries in background.items():
        bg[slot] = list(entries)
    if flavor:
        bg["social"] = bg["social"] + FLAVOR[flavor]
    return {
        "id": f"p{idx:03d}",
        "age": age,
        "gender": gender,
        "chief_complaint": chief,
        "gold_diseases": disease_key if isinstance(disease_key, list) else [disease_key],
        "hpi_affirmed": affirmed,
        "hpi_denied": denied,
        "background": bg,
    }


def sym(name, **details):
    return {"name": name, "details": details}


PROFILES = [
    # --- influenza -------------------------------------------------------
    profile(1, "influenza", 34, "female", "a bad cough and a fever",
            [sym("cough", character="dry and hacking", duration="3 days", onset="3 days ago"),
             sym("fever", character="high at night", duration="2 days"),
             sym("muscle aches", character="deep soreness", factors="worse when moving")],
            ["shortness of breath", "wheezing", "smoking"],
            {"social": []}),
    profile(2, "influenza", 58, "male", "coughing a lot and feeling feverish",
            [sym("cough", character="dry", duration="4 days"),
             sym("fever", duration="2 days", onset="2 days ago"),
             sym("muscle aches")],
            ["shortness of breath", "wheezing"],
            {"past_medical": []}, flavor="moderate"),
    profile(3, "influenza", 25, "other", "a nasty cough that will not quit",
            [sym("cough", character="dry", duration="5 days", factors="nothing helps"),
             sym("fever", duration="1 day"),
             sym("muscle aches", character="all-over ache")],
            ["shortness of breath", "wheezing", "smoking"],
            {"social": []}),
    # --- pneumonia -------------------------------------------------------
    profile(4, "pneumonia", 67, "male", "a heavy cough",
            [sym("cough", character="wet and rattling", duration="8 days"),
             sym("fever", character="spiking", duration="4 days"),
             sym("shortness of breath", onset="3 days ago", factors="worse climbing stairs")],
            ["muscle aches", "wheezing", "high blood pressure"],
            {"social": ["smoking"]}),
    profile(5, "pneumonia", 72, "female", "coughing and trouble breathing",
            [sym("cough", character="productive", duration="1 week"),
             sym("fever", duration="5 days"),
             sym("shortness of breath", character="winded at rest")],
            ["muscle aches", "wheezing", "high blood pressure", "leg swelling"],
            {"social": ["smoking"]}, flavor="moderate"),
    profile(6, "pneumonia", 45, "male", "a bad cough with a fever",
            [sym("cough", character="deep", duration="6 days", onset="6 days ago"),
             sym("fever", character="persistent"),
             sym("shortness of breath", factors="worse lying down")],
            ["muscle aches", "wheezing", "high blood pressure"],
            {"social": ["smoking"]}),
    # --- asthma ----------------------------------------------------------
    profile(7, "asthma", 19, "female", "coughing fits at night",
            [sym("cough", character="dry", duration="3 weeks", factors="worse at night"),
             sym("wheezing", character="whistling when breathing out"),
             sym("shortness of breath", factors="worse with exercise")],
            ["fever", "muscle aches", "high blood pressure", "smoking"],
            {"social": ["pollen"]}),
    profile(8, "asthma", 31, "male", "a cough that will not settle",
            [sym("cough", duration="2 weeks"),
             sym("wheezing"),
             sym("shortness of breath", onset="2 weeks ago")],
            ["fever", "muscle aches", "high blood pressure"],
            {"social": ["pollen"]}, flavor="moderate"),
    profile(9, "asthma", 27, "female", "cough and trouble breathing",
            [sym("cough", character="tickly", duration="10 days"),
             sym("wheezing", factors="worse outdoors in spring"),
             sym("shortness of breath")],
            ["fever", "muscle aches", "high blood pressure", "smoking"],
            {"social": ["pollen"]}),
    # --- acute appendicitis ----------------------------------------------
    profile(10, "acute appendicitis", 22, "male", "belly pain that keeps getting worse",
            [sym("abdominal pain", location="right lower quadrant", character="sharp and stabbing",
                 duration="1 day", onset="yesterday evening", factors="worse when walking"),
             sym("nausea", onset="this morning"),
             sym("loss of appetite")],
            ["diarrhea", "heartburn", "contaminated food", "heavy alcohol use"],
            {"social": []}),
    profile(11, "acute appendicitis", 35, "female", "strong stomach pain",
            [sym("abdominal pain", location="lower right side", character="sharp",
                 duration="2 days", factors="worse with movement"),
             sym("nausea"),
             sym("loss of appetite", onset="yesterday")],
            ["diarrhea", "heartburn", "contaminated food", "heavy alcohol use"],
            {"past_medical": []}, flavor="moderate"),
    profile(12, "acute appendicitis", 16, "male", "belly pain and feeling sick",
            [sym("abdominal pain", location="around the navel moving right", character="stabbing",
                 duration="1 day"),
             sym("nausea", character="constant queasiness"),
             sym("loss of appetite")],
            ["diarrhea", "heartburn", "contaminated food", "heavy alcohol use"],
            {"social": []}),
    # --- gastroenteritis --------------------------------------------------
    profile(13, "gastroenteritis", 29, "female", "stomach pain that comes and goes",
            [sym("abdominal pain", location="all over the abdomen", character="crampy",
                 duration="2 days", factors="comes in waves"),
             sym("nausea", onset="2 days ago"),
             sym("diarrhea", duration="2 days")],
            ["loss of appetite", "heartburn", "heavy alcohol use"],
            {"social": ["contaminated food"]}),
    profile(14, "gastroenteritis", 41, "male", "belly pain and the runs",
            [sym("abdominal pain", location="lower abdomen", character="cramping", duration="3 days"),
             sym("nausea"),
             sym("diarrhea", character="watery", duration="3 days")],
            ["loss of appetite", "heartburn", "heavy alcohol use"],
            {"social": ["contaminated food"]}, flavor="moderate"),
    profile(15, "gastroenteritis", 52, "female", "stomach pain after a buffet dinner",
            [sym("abdominal pain", location="middle of the belly", character="twisting", duration="1 day"),
             sym("nausea", character="waves of queasiness"),
             sym("diarrhea", onset="last night")],
            ["loss of appetite", "heartburn", "heavy alcohol use"],
            {"social": ["contaminated food"]}),
    # --- gastritis ---------------------------------------------------------
    profile(16, "gastritis", 48, "male", "stomach pain and heartburn",
            [sym("abdominal pain", location="upper stomach", character="burning", duration="3 weeks",
                 factors="worse on an empty stomach"),
             sym("heartburn", factors="worse after coffee")],
            ["nausea", "diarrhea", "loss of appetite", "contaminated food"],
            {"social": ["heavy alcohol use"]}),
    profile(17, "gastritis", 55, "female", "burning belly pain and heartburn",
            [sym("abdominal pain", location="epigastric area", character="gnawing", duration="1 month"),
             sym("heartburn", duration="1 month")],
            ["nausea", "diarrhea", "loss of appetite"],
            {"social": ["heavy alcohol use"]}, flavor="moderate"),
    profile(18, "gastritis", 39, "male", "terrible heartburn after meals",
            [sym("heartburn", character="burning behind the breastbone", duration="2 weeks",
                 factors="worse after spicy food"),
             sym("abdominal pain", location="upper belly", character="dull burn")],
            ["nausea", "diarrhea", "loss of appetite", "contaminated food"],
            {"social": ["heavy alcohol use"]}),
    # --- congestive heart failure ------------------------------------------
    profile(19, "congestive heart failure", 74, "male", "trouble breathing",
            [sym("shortness of breath", onset="3 weeks ago", factors="worse lying flat"),
             sym("leg swelling", location="both ankles", duration="2 weeks"),
             sym("fatigue", character="worn out by mid-morning")],
            ["cough", "palpitations", "chest tightness"],
            {"past_medical": ["high blood pressure"]}),
    profile(20, "congestive heart failure", 68, "female", "short of breath all the time",
            [sym("shortness of breath", factors="worse climbing stairs"),
             sym("leg swelling", character="puffy ankles by evening"),
             sym("fatigue")],
            ["cough", "palpitations"],
            {"past_medical": ["high blood pressure"]}, flavor="moderate"),
    profile(21, "congestive heart failure", 80, "male", "hard to breathe when lying down",
            [sym("shortness of breath", character="smothering when flat", duration="1 month"),
             sym("leg swelling", duration="3 weeks"),
             sym("fatigue", factors="naps do not help")],
            ["cough", "palpitations", "chest tightness"],
            {"past_medical": ["high blood pressure"]}, flavor="low"),
    # --- atrial fibrillation -------------------------------------------------
    profile(22, "atrial fibrillation", 63, "female", "my heart racing",
            [sym("palpitations", character="fluttering", onset="2 weeks ago",
                 factors="comes on out of nowhere"),
             sym("fatigue"),
             sym("chest tightness", character="pressure-like")],
            ["shortness of breath", "leg swelling", "cough"],
            {"past_medical": ["high blood pressure"]}),
    profile(23, "atrial fibrillation", 59, "male", "heart racing and skipped beats",
            [sym("palpitations", duration="1 week"),
             sym("fatigue", character="drained"),
             sym("chest tightness")],
            ["shortness of breath", "leg swelling"],
            {"past_medical": ["high blood pressure"]}, flavor="moderate"),
    profile(24, "atrial fibrillation", 71, "female", "a racing heart at rest",
            [sym("palpitations", character="pounding", onset="10 days ago"),
             sym("fatigue"),
             sym("chest tightness", factors="comes with the racing")],
            ["shortness of breath", "leg swelling", "cough"],
            {"past_medical": ["high blood pressure"]}, flavor="low"),
    # --- doubles ---------------------------------------------------------
    profile(25, ["influenza", "pneumonia"], 61, "male", "a bad cough and a fever",
            [sym("cough", character="wet", duration="5 days"),
             sym("fever", character="spiking at night"),
             sym("muscle aches"),
             sym("shortness of breath", onset="2 days ago")],
            ["wheezing", "high blood pressure"],
            {"social": ["smoking"]}),
    profile(26, ["influenza", "pneumonia"], 49, "female", "cough, fever and aching all over",
            [sym("cough", duration="4 days"),
             sym("fever"),
             sym("muscle aches", character="deep ache"),
             sym("shortness of breath")],
            ["wheezing", "high blood pressure"],
            {"social": ["smoking"]}, flavor="moderate"),
    profile(27, ["congestive heart failure", "atrial fibrillation"], 77, "male",
            "trouble breathing and my heart racing",
            [sym("shortness of breath", factors="worse lying down"),
             sym("leg swelling", duration="2 weeks"),
             sym("fatigue"),
             sym("palpitations", character="irregular thumping"),
             sym("chest tightness")],
            ["cough"],
            {"past_medical": ["high blood pressure"]}),
    profile(28, ["congestive heart failure", "atrial fibrillation"], 69, "female",
            "short of breath with a racing heart",
            [sym("shortness of breath"),
             sym("leg swelling"),
             sym("fatigue", character="completely drained"),
             sym("palpitations"),
             sym("chest tightness", character="band of pressure")],
            ["cough"],
            {"past_medical": ["high blood pressure"]}, flavor="moderate"),
    profile(29, ["gastroenteritis", "gastritis"], 44, "male", "stomach pain and heartburn",
            [sym("abdominal pain", location="upper and middle belly", character="cramping burn",
                 duration="4 days"),
             sym("nausea"),
             sym("diarrhea", duration="3 days"),
             sym("heartburn", factors="worse after meals")],
            ["loss of appetite"],
            {"social": ["contaminated food", "heavy alcohol use"]}),
    profile(30, ["acute appendicitis", "gastroenteritis"], 26, "female", "belly pain and feeling sick",
            [sym("abdominal pain", location="lower belly", character="cramping then sharp",
                 duration="2 days"),
             sym("nausea"),
             sym("loss of appetite"),
             sym("diarrhea", onset="yesterday")],
            ["heartburn", "heavy alcohol use"],
            {"social": ["contaminated food"]}),
    # --- extra singles for batch breadth ---------------------------------
    profile(31, "pneumonia", 83, "female", "a heavy cough and a fever",
            [sym("cough", character="rattling"),
             sym("fever", duration="3 days"),
             sym("shortness of breath", factors="worse walking to the mailbox")],
            ["muscle aches", "wheezing", "high blood pressure"],
            {"social": ["smoking"]}, flavor="low"),
    profile(32, "gastroenteritis", 33, "other", "belly pain after takeout food",
            [sym("abdominal pain", location="whole belly", character="crampy", duration="1 day"),
             sym("nausea", onset="last night"),
             sym("diarrhea")],
            ["loss of appetite", "heartburn", "heavy alcohol use"],
            {"social": ["contaminated food"]}),
]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for doc in PROFILES:
        path = OUT / f"{doc['id']}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(PROFILES)} profiles to {OUT}")


if __name__ == "__main__":
    main()
