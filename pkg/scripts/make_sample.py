"""Regenerate the bundled synthetic sample corpora.

    python3 scripts/make_sample.py src/cqarank/data/sample

The texts are invented forum posts; nothing is taken from the real forum.
"""
import json
import random
import sys
from pathlib import Path

TOPICS = [
    ("Visas and Permits", "family visa for my wife",
     "How long does it take to get a family visa for my wife? I work in Doha and my salary is 12000 QR.",
     ["Apply at the immigration office in Al Gharrafa with your contract, salary certificate and attested marriage certificate. It took 3 weeks for me.",
      "You need a salary of at least 10000 QR and a company accommodation letter. Go to the immigration department early in the morning.",
      "Check the MOI website http://portal.moi.gov.qa for the checklist, then submit everything at the service centre."]),
    ("Working in Qatar", "end of service gratuity",
     "What is the end of service gratuity if I resign after 4 years? Is it calculated on the basic salary?",
     ["Gratuity is 3 weeks of basic salary for every year of service under the labour law, so 12 weeks in your case.",
      "It is based on basic salary only, not allowances. Ask HR for the calculation in writing before you resign.",
      "Labour law article 54 says at least 3 weeks per year after one year of service. Your contract may give more."]),
    ("Cars", "best place to buy a used car",
     "Where can I buy a good used car in Doha? Budget around 30000 QR.",
     ["Try the car market on Salwa Road, there are many dealers and you can negotiate the price.",
      "Check the classifieds on http://www.qatarliving.com/classifieds and always do a full inspection at Fahes before paying.",
      "Toyota and Nissan dealers in Industrial Area sell certified used cars with a warranty, a bit above your budget."]),
    ("Health and Fitness", "good dentist near the pearl",
     "Can anyone recommend a good dentist near the Pearl? My tooth is killing me.",
     ["There is a clinic in Porto Arabia tower 21, the dentist there is very gentle and they accept most insurance.",
      "Go to Hamad hospital emergency if the pain is severe, otherwise the dental centre in West Bay is excellent.",
      "I can recommend the clinic at Medina Centrale, call 44001234 to book, they usually have slots the same week."]),
    ("Qatar Living Lifestyle", "weekend activities for kids",
     "What are good weekend activities for kids in Doha during summer?",
     ["Take them to Aspire Park in the morning or the indoor playground at Villaggio mall when it gets hot.",
      "The Museum of Islamic Art has free family workshops on Fridays and the park next to it is lovely.",
      "Katara has a beach and cultural events every weekend, entry is free and there is plenty of parking."]),
    ("Education", "british curriculum school fees",
     "Which British curriculum schools have reasonable fees? We are moving to Al Wakra next month.",
     ["Doha College and Park House are good but expensive, expect around 45000 QR per year for primary.",
      "In Al Wakra the Compass school has a branch nearby and the fees are lower than in West Bay.",
      "Ask your employer about the education allowance first, many companies cover part of the school fees."]),
    ("Socialising", "where to play football",
     "Where can I play football on weekday evenings? I live in Al Sadd.",
     ["There is a pickup game at Aspire every Tuesday and Thursday at 8 pm, just show up with your boots.",
      "Join the Doha amateur league, they have teams in Al Sadd and the pitches are near Al Sadd club.",
      "Check the Doha Sports Club page, they organise 5 a side matches in Al Sadd and Bin Mahmoud."]),
    ("Electronics", "repair shop for iphone screen",
     "Where can I repair a cracked iPhone screen quickly and at a fair price?",
     ["The shops in Souq Haraj fix screens in about an hour for around 250 QR, ask for an original part.",
      "Go to the authorised service centre in City Center mall, more expensive but they keep the warranty.",
      "There is a small shop near the Al Mirqab mall that did mine for 200 QR in 40 minutes."]),
    ("Visas and Permits", "exit permit process",
     "Do I still need an exit permit to travel on vacation? My sponsor is a private company.",
     ["Most private sector workers no longer need an exit permit, but check with HR whether you are on the list.",
      "You can check your status on the MOI portal http://portal.moi.gov.qa before booking tickets.",
      "Employers may keep up to 5 percent of staff on the approval list, so ask your company directly."]),
    ("Working in Qatar", "how to transfer sponsorship",
     "How do I transfer my sponsorship to a new employer without a NOC?",
     ["Under the new rules you can change jobs after the probation period by giving notice through the ADLSA portal.",
      "Submit the change request online, your new employer must upload the contract and you give one month notice.",
      "Visit the labour department in Al Muntazah with your contract and ID, they will guide you through the steps."]),
    ("Cars", "transfer car ownership",
     "What documents are needed to transfer car ownership to my name?",
     ["Both buyer and seller go to the traffic department with IDs, the registration card and a valid insurance.",
      "The car must pass the Fahes inspection first, then you pay the transfer fee at the traffic office.",
      "You can do it in Metrash2 if both parties have accounts and the car has no violations."]),
    ("Health and Fitness", "affordable gym in doha",
     "Any affordable gym in Doha with a swimming pool?",
     ["The Aspire Zone gym has a pool and the monthly fee is around 300 QR for residents.",
      "Try the gym at the Al Sadd club, it is cheap and the pool is olympic size.",
      "Hotels in West Bay offer pool memberships but expect 600 QR per month or more."]),
    ("Qatar Living Lifestyle", "best shawarma in town",
     "Who makes the best shawarma in Doha? Looking for a late night place.",
     ["Turkey Central on Al Mirqab street is open late and the chicken shawarma is the best I have had.",
      "Try the small stalls near Souq Waqif, cheap and delicious and open until 2 am.",
      "Automatic restaurant in Al Sadd has been my favourite for years, order the arabic plate."]),
    ("Education", "arabic classes for adults",
     "Where can I take Arabic classes as an adult? Evening classes preferred.",
     ["Qatar Foundation runs evening Arabic courses for adults, registration opens in September.",
      "The Fanar cultural centre offers free Arabic classes for expats in the evenings.",
      "Try the language centre at Qatar University, they have beginner levels twice a week."]),
    ("Socialising", "expat groups for newcomers",
     "Just moved to Doha. Any expat groups to meet new people?",
     ["The Doha Hash House Harriers run every weekend, friendly group and a good way to meet people.",
      "Join the newcomers meetup at Katara every first Thursday of the month.",
      "Qatar Living events page lists meetups, http://www.qatarliving.com/events has many options."]),
    ("Electronics", "internet provider recommendation",
     "Which internet provider is better for home, Ooredoo or Vodafone?",
     ["Ooredoo fiber is faster in most areas, I get 100 Mbps in Al Waab for 365 QR per month.",
      "Vodafone home broadband is cheaper but coverage depends on your building, check availability first.",
      "Ask your building management which fiber provider is installed, that decides it in practice."]),
    ("Visas and Permits", "visit visa for parents",
     "How can I bring my parents on a visit visa for two months?",
     ["Apply through Metrash2 under family visit, attach your ID, their passports and a hotel or tenancy document.",
      "You need a salary above 10000 QR and health insurance for them, the visa is issued in about a week.",
      "The Hayya portal also issues visit visas now, check http://hayya.qa for the current rules."]),
    ("Working in Qatar", "annual leave entitlement",
     "How many days of annual leave am I entitled to after 5 years?",
     ["After 5 years of service the labour law gives you at least 4 weeks of paid annual leave.",
      "Three weeks for the first five years and four weeks after that, your contract may offer more.",
      "Check article 79 of the labour law and compare with your contract, the better one applies."]),
    ("Cars", "car insurance comprehensive",
     "Which company gives the best comprehensive car insurance?",
     ["QIC has good comprehensive cover and quick claims, expect about 3 percent of the car value.",
      "Doha Insurance was cheaper for me and the agency repair option is included.",
      "Compare quotes online at the insurers websites, prices vary a lot for the same car."]),
    ("Health and Fitness", "health card renewal",
     "How do I renew my health card? It expired last month.",
     ["Renew it online at the HMC website or in the Metrash2 app, the fee is 100 QR.",
      "Go to any primary health centre with your ID, they renew it in ten minutes.",
      "You can pay the renewal fee at the kiosks in the malls using your QID."]),
]

OFF_TOPIC = [
    "thanks for the question, i have the same problem",
    "hahaha",
    "lol good luck with that",
    "Why do you want to know?",
    "did anyone watch the match yesterday?",
    "I disagree, this forum is useless :(",
    "bump",
    "same question here, anyone?",
    "Thank you!",
    "mmm I think you should ask somewhere else",
]

PARTIAL = [
    "I heard it depends on your company, not sure though.",
    "Maybe call the ministry? They might know.",
    "I think it changed last year but I am not sure about the details.",
    "Ask in the other thread, someone posted about this before.",
    "It was easier a few years ago, now there are more steps.",
]

USERS = [f"u{i:03d}" for i in range(1, 41)]
BASE_TIME = 1_420_070_400  # 2015-01-01


def thread_record(rng, idx, topic, prefix="Q", n_extra=None, relevance=None, search_rank=None, original=None):
    category, subject, body, good = topic
    author = rng.choice(USERS)
    qid = f"{prefix}{idx:03d}"
    comments = []
    pool = [(g, "Good") for g in good]
    pool += [(t, "PotentiallyUseful") for t in rng.sample(PARTIAL, 2)]
    pool += [(t, "Bad") for t in rng.sample(OFF_TOPIC, n_extra if n_extra is not None else rng.randint(2, 4))]
    rng.shuffle(pool)
    for pos, (text, label) in enumerate(pool, 1):
        commenter = author if label == "Bad" and rng.random() < 0.25 else rng.choice(USERS)
        if rng.random() < 0.15:
            text = f"@{rng.choice(USERS)} {text}"
        comments.append({"id": f"{qid}_C{pos}", "author_id": commenter, "body": text, "position": pos,
                         "label": label})
    return {
        "question": {"id": qid, "subject": subject, "body": body, "category": category, "author_id": author,
                     "timestamp": BASE_TIME + idx * 86400 * 3, "search_rank": search_rank, "relevance": relevance},
        "original_question": original,
        "comments": comments,
    }


def profiles(rng):
    out = []
    for uid in USERS[:-4]:  # the last users have no profile
        reg = BASE_TIME - rng.randint(30, 1500) * 86400
        last = BASE_TIME + rng.randint(0, 60) * 86400
        hours = [0] * 24
        for _ in range(rng.randint(5, 60)):
            hours[rng.choice([8, 9, 12, 13, 19, 20, 21, 22, rng.randrange(24)])] += 1
        out.append({
            "user_id": uid, "n_questions": rng.randint(0, 40), "n_comments": rng.randint(0, 400),
            "n_classifieds": rng.randint(0, 10), "registration_time": reg, "last_activity_time": last,
            "active_hours": hours, "troll_mentions": rng.choice([0, 0, 0, 1, 3]),
            "n_good_comments": rng.randint(0, 30), "n_bad_comments": rng.randint(0, 30),
        })
    return out


def related_records(rng):
    """Original questions, each with three related threads ranked by a search engine."""
    records = []
    for o in range(4):
        base = TOPICS[o * 5]
        orig = {"id": f"ORG{o:02d}", "subject": base[1], "body": "Same situation, " + base[2].lower(),
                "category": base[0], "author_id": rng.choice(USERS), "timestamp": BASE_TIME + 400 * 86400,
                "search_rank": None, "relevance": None}
        related = [(base, "PerfectMatch"), (TOPICS[o * 5 + 1], "Irrelevant"), (TOPICS[(o * 5 + 8) % 20], "Relevant")]
        rng.shuffle(related)
        for rank, (topic, rel) in enumerate(related, 1):
            rec = thread_record(rng, o * 10 + rank, topic, prefix="R", n_extra=2, relevance=rel,
                                search_rank=rank, original=orig)
            if rel == "Irrelevant":
                for c in rec["comments"]:
                    c["label"] = "Bad"
            records.append(rec)
    return records


def main(out_dir):
    rng = random.Random(20160616)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    threads = [thread_record(rng, i, t) for i, t in enumerate(TOPICS)]
    with open(out / "threads.jsonl", "w", encoding="utf-8") as fh:
        for t in threads:
            fh.write(json.dumps(t) + "\n")
    with open(out / "profiles.jsonl", "w", encoding="utf-8") as fh:
        for p in profiles(rng):
            fh.write(json.dumps(p) + "\n")
    with open(out / "related.jsonl", "w", encoding="utf-8") as fh:
        for t in related_records(rng):
            fh.write(json.dumps(t) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/cqarank/data/sample")
