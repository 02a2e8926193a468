#!/usr/bin/env python3
"""Regenerates data/fixtures/dmd_bmd: a 20-abstract synthetic corpus with
recorded screening/extraction replies for two providers, a curated backbone,
a PubMed index, 3 scenarios and 3 counterfactual cases.

PMIDs are synthetic (901000xx); nothing here is copied from real abstracts."""
import json, pathlib, sys

OUT = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/fixtures/dmd_bmd")
A, B = "gemma3-27b", "qwen3-14b"

# (title, [sentences], screen confidence per provider, extract flag)
ABS = [
 ("Natural history of ambulation in Duchenne muscular dystrophy",
  ["Duchenne muscular dystrophy presents with proximal weakness and calf pseudohypertrophy in early childhood.",
   "Symptom onset was typically observed at 2-5 years of age.",
   "Loss of ambulation occurred at a median age of 10 years in untreated boys."], 0.97),
 ("Becker muscular dystrophy: a milder dystrophinopathy",
  ["Becker muscular dystrophy is caused by in-frame deletions of the dystrophin gene.",
   "Patients with Becker muscular dystrophy usually remain ambulatory beyond 16 years.",
   "Onset of symptoms in Becker muscular dystrophy ranged from 5-15 years."], 0.95),
 ("Glucocorticoid treatment prolongs ambulation in Duchenne muscular dystrophy",
  ["Duchenne muscular dystrophy was treated with prednisone or deflazacort in this cohort.",
   "Daily deflazacort delayed loss of ambulation by about 2.5 years compared with no treatment.",
   "Deflazacort was associated with weight gain and cataract."], 0.96),
 ("Cardiomyopathy in Duchenne and Becker muscular dystrophy",
  ["Dilated cardiomyopathy develops in most patients with Duchenne muscular dystrophy by 18 years.",
   "Becker muscular dystrophy is associated with cardiomyopathy that may precede skeletal weakness.",
   "Cardiac magnetic resonance detects early fibrosis in dystrophinopathy."], 0.94),
 ("Creatine kinase as a screening marker for dystrophinopathy",
  ["Creatine kinase is markedly elevated in Duchenne muscular dystrophy from birth.",
   "Becker muscular dystrophy shows a moderately elevated creatine kinase.",
   "Newborn screening programmes measure creatine kinase in dried blood spots."], 0.92),
 ("Respiratory decline in Duchenne muscular dystrophy",
  ["Forced vital capacity declines after loss of ambulation in Duchenne muscular dystrophy.",
   "Noninvasive ventilation was required at a mean age of 19 years.",
   "Respiratory failure remains a leading cause of death."], 0.93),
 ("Exon skipping therapy with eteplirsen",
  ["Duchenne muscular dystrophy patients amenable to exon 51 skipping were treated with eteplirsen.",
   "Eteplirsen increased dystrophin expression in muscle biopsies.",
   "Exon skipping converts an out-of-frame deletion into an in-frame transcript."], 0.95),
 ("Scoliosis surgery in non-ambulant Duchenne muscular dystrophy",
  ["Scoliosis develops in Duchenne muscular dystrophy after loss of ambulation.",
   "Spinal fusion was performed at a mean age of 14 years.",
   "Glucocorticoid treatment reduced the need for spinal surgery."], 0.90),
 ("Survival trends in Duchenne muscular dystrophy",
  ["Median survival in Duchenne muscular dystrophy has improved to about 28 years with ventilatory support.",
   "Cardiac deaths have become relatively more frequent.",
   "Multidisciplinary care improves outcomes in dystrophinopathy."], 0.91),
 ("Cognitive involvement in dystrophinopathies",
  ["Intellectual disability is associated with Duchenne muscular dystrophy in about one third of patients.",
   "Distal deletions affecting Dp71 confer higher risk of cognitive impairment.",
   "Becker muscular dystrophy has lower rates of learning disability."], 0.89),
 ("Muscle MRI patterns in Becker muscular dystrophy",
  ["Becker muscular dystrophy manifests as exercise-induced cramps and myalgia in some adults.",
   "Muscle MRI showed fatty replacement of the posterior thigh compartment.",
   "Quantitative MRI may serve as an outcome measure in Becker muscular dystrophy."], 0.90),
 ("Carrier females and cardiomyopathy",
  ["Female carriers of dystrophin mutations can develop cardiomyopathy in adulthood.",
   "Cardiac screening every 3-5 years is recommended for carriers.",
   "Skeletal muscle weakness in carriers is usually mild."], 0.88),
 ("Gowers sign and early motor milestones in Duchenne muscular dystrophy",
  ["Duchenne muscular dystrophy manifests as Gowers sign in young boys.",
   "Independent walking was delayed beyond 18 months in many boys.",
   "Toe walking and frequent falls were common presenting complaints."], 0.93),
 ("Givinostat in Duchenne muscular dystrophy",
  ["Duchenne muscular dystrophy was treated with givinostat in a phase 3 trial.",
   "Givinostat slowed decline in the four-stair climb test over 18 months.",
   "Diarrhoea and thrombocytopenia were the most common adverse events."], 0.91),
 ("Vamorolone versus prednisone in Duchenne muscular dystrophy",
  ["Duchenne muscular dystrophy was treated with vamorolone in boys aged 4 to 7 years.",
   "Vamorolone preserved growth compared with prednisone.",
   "Motor outcomes at 24 weeks were similar between vamorolone and prednisone."], 0.94),
 ("Genotype-phenotype correlation in dystrophinopathy",
  ["The reading frame rule distinguishes Duchenne from Becker muscular dystrophy in most cases.",
   "Out-of-frame deletions cause Duchenne muscular dystrophy.",
   "In-frame deletions cause Becker muscular dystrophy."], 0.96),
 ("Bone health in glucocorticoid-treated Duchenne muscular dystrophy",
  ["Vertebral fractures develop in Duchenne muscular dystrophy during long-term glucocorticoid therapy.",
   "Fractures were observed after 5 years of glucocorticoid treatment.",
   "Bisphosphonates are used for symptomatic osteoporosis."], 0.90),
 ("Dystrophin-deficient mdx mouse treadmill protocol",
  ["The mdx mouse was exercised on a treadmill for 4 weeks.",
   "Serum enzyme levels rose after exercise.",
   "The protocol standardises preclinical testing."], 0.60),
 ("Health economics of neuromuscular clinics",
  ["We surveyed costs in neuromuscular clinics across three countries.",
   "Staffing was the largest cost driver.",
   "Telemedicine reduced travel costs."], 0.30),
 ("Case report of rhabdomyolysis after statin exposure",
  ["A 45-year-old man developed rhabdomyolysis after statin exposure.",
   "Creatine kinase exceeded 20000 U/L on admission.",
   "Symptoms resolved after drug withdrawal."], 0.80),
]

# (abstract index, sentence index, subject, s_type, predicate, object, o_type, providers, temporal phrase)
TRIPLES = [
 (0, 0, "Duchenne muscular dystrophy", "Disease", "MANIFESTS_AS", "calf pseudohypertrophy", "Symptom", [A, B], None),
 (0, 1, "Duchenne muscular dystrophy", "Disease", "HAS_ONSET_AGE", "symptom onset", "ClinicalFinding", [A, B], "2-5 years"),
 (0, 2, "Duchenne muscular dystrophy", "Disease", "LOSES_FUNCTION_AT", "loss of ambulation", "ClinicalFinding", [A], "median age of 10 years"),
 (1, 0, "Becker muscular dystrophy", "Disease", "CAUSED_BY_MUTATION", "in-frame deletions", "Mutation", [A, B], None),
 (1, 1, "Becker muscular dystrophy", "Disease", "PRESERVES_FUNCTION", "ambulation", "PhysiologicalFunction", [B], None),
 (1, 2, "Becker muscular dystrophy", "Disease", "HAS_ONSET_AGE", "symptom onset", "ClinicalFinding", [A, B], "5-15 years"),
 (2, 0, "Duchenne muscular dystrophy", "Disease", "TREATED_WITH", "prednisone", "Treatment", [A, B], None),
 (2, 0, "Duchenne muscular dystrophy", "Disease", "TREATED_WITH", "deflazacort", "Treatment", [A, B], None),
 (2, 2, "deflazacort", "Treatment", "ASSOCIATED_WITH", "cataract", "ClinicalFinding", [A], None),
 (3, 0, "Duchenne muscular dystrophy", "Disease", "DEVELOPS_COMPLICATION_AT", "dilated cardiomyopathy", "ClinicalFinding", [A, B], "by 18 years"),
 (3, 1, "Becker muscular dystrophy", "Disease", "ASSOCIATED_WITH", "cardiomyopathy", "ClinicalFinding", [A, B], None),
 (4, 0, "Duchenne muscular dystrophy", "Disease", "HAS_MEASUREMENT", "creatine kinase", "Measurement", [A, B], None),
 (4, 1, "Becker muscular dystrophy", "Disease", "HAS_MEASUREMENT", "creatine kinase", "Measurement", [B], None),
 (5, 1, "Duchenne muscular dystrophy", "Disease", "REQUIRES_INTERVENTION_AT", "noninvasive ventilation", "Procedure", [A, B], "mean age of 19 years"),
 (6, 0, "Duchenne muscular dystrophy", "Disease", "TREATED_WITH", "eteplirsen", "Treatment", [A], None),
 # reversed direction from one provider; the correction rules restore it
 (6, 0, "eteplirsen", "Treatment", "TREATED_WITH", "Duchenne muscular dystrophy", "Disease", [B], None),
 (1, 0, "dystrophin", "Gene", "CAUSED_BY_MUTATION", "Becker muscular dystrophy", "Disease", [B], None),
 (6, 1, "eteplirsen", "Treatment", "ASSOCIATED_WITH", "dystrophin expression", "Measurement", [A], None),
 (7, 1, "Duchenne muscular dystrophy", "Disease", "REQUIRES_INTERVENTION_AT", "spinal fusion", "Procedure", [A], "mean age of 14 years"),
 (8, 0, "Duchenne muscular dystrophy", "Disease", "HAS_SURVIVAL_TO", "median survival", "ClinicalFinding", [A, B], "about 28 years"),
 (9, 0, "Duchenne muscular dystrophy", "Disease", "ASSOCIATED_WITH", "intellectual disability", "ClinicalFinding", [A, B], None),
 (10, 0, "Becker muscular dystrophy", "Disease", "MANIFESTS_AS", "exercise-induced cramps", "Symptom", [A, B], None),
 (11, 0, "dystrophin mutations", "Mutation", "ASSOCIATED_WITH", "cardiomyopathy", "ClinicalFinding", [B], None),
 (12, 0, "Duchenne muscular dystrophy", "Disease", "MANIFESTS_AS", "Gowers sign", "Symptom", [A, B], None),
 (13, 0, "Duchenne muscular dystrophy", "Disease", "TREATED_WITH", "givinostat", "Treatment", [A], None),
 (14, 0, "Duchenne muscular dystrophy", "Disease", "TREATED_WITH", "vamorolone", "Treatment", [A, B], None),
 (15, 1, "Duchenne muscular dystrophy", "Disease", "CAUSED_BY_MUTATION", "out-of-frame deletions", "Mutation", [A, B], None),
 (15, 0, "Duchenne muscular dystrophy", "Disease", "DIFFERENTIATES_FROM", "Becker muscular dystrophy", "Disease", [A], None),
 (16, 1, "Duchenne muscular dystrophy", "Disease", "DEVELOPS_COMPLICATION_AT", "vertebral fractures", "ClinicalFinding", [B], "after 5 years"),
 # quote not present in abstract 2: dropped by the 3-gram check
 (2, None, "deflazacort", "Treatment", "ASSOCIATED_WITH", "hepatotoxicity", "ClinicalFinding", [B], None),
]

TIER1 = [
 ("Duchenne muscular dystrophy", "Disease", "C0013264", "TREATED_WITH", "prednisone", "Treatment", "C0032952", ["90100003"], False, None),
 ("Duchenne muscular dystrophy", "Disease", "C0013264", "TREATED_WITH", "deflazacort", "Treatment", "C0057230", ["90100003"], False, None),
 ("Duchenne muscular dystrophy", "Disease", "C0013264", "MANIFESTS_AS", "Gowers sign", "Symptom", None, ["90100013"], False, None),
 ("Becker muscular dystrophy", "Disease", "C0917713", "ASSOCIATED_WITH", "cardiomyopathy", "ClinicalFinding", "C0878544", ["90100004"], False, None),
 ("Duchenne muscular dystrophy", "Disease", "C0013264", "REQUIRES_INTERVENTION_AT", "corticosteroid initiation", "Procedure", None, ["90100003"], True, "4-6 years"),
]

def pmid(i): return f"{90100001 + i}"

def main():
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "abstracts.jsonl", "w") as f:
        for i, (title, sents, _) in enumerate(ABS):
            f.write(json.dumps({"pmid": pmid(i), "title": title, "text": " ".join(sents), "year": 2016 + i % 9,
                                "mesh_terms": ["Muscular Dystrophy, Duchenne"] if i < 17 else []}) + "\n")
    with open(OUT / "providers.jsonl", "w") as f:
        for prov in (A, B):
            for i, (_, _, conf) in enumerate(ABS):
                c = conf if prov == A else round(max(0.0, conf - 0.02), 2)
                f.write(json.dumps({"provider": prov, "call": "screen", "key": pmid(i),
                                    "response": {"extract": conf >= 0.8, "confidence": c}}) + "\n")
            for i, (_, sents, _) in enumerate(ABS):
                out = []
                for (ai, si, s, st, p, o, ot, provs, tp) in TRIPLES:
                    if ai != i or prov not in provs: continue
                    q = sents[si] if si is not None else "Deflazacort caused severe hepatotoxicity in all patients."
                    t = {"subject": s, "subject_type": st, "predicate": p, "object": o, "object_type": ot,
                         "evidence_quote": q}
                    if tp: t["temporal_phrase"] = tp
                    out.append(t)
                f.write(json.dumps({"provider": prov, "call": "extract", "key": pmid(i), "response": out}) + "\n")
    with open(OUT / "tier1.jsonl", "w") as f:
        for (s, st, sc, p, o, ot, oc, pm, temporal, phrase) in TIER1:
            r = {"subject": s, "subject_type": st, "subject_cui": sc, "predicate": p, "object": o, "object_type": ot,
                 "object_cui": oc, "quality_tier": "GOLD", "source_models": ["curated"], "pmid_list": pm,
                 "evidence_sample": "curated backbone", "is_temporal": temporal, "disease_context": ["DMD"] if s.startswith("Duchenne") else ["BMD"]}
            if phrase: r["temporal_phrase"] = phrase
            f.write(json.dumps(r) + "\n")
    recs = {}
    for i, (title, _, _) in enumerate(ABS):
        recs[pmid(i)] = {"title": title, "journal": "Neuromuscular Disorders", "mesh_terms": []}
    json.dump({"records": recs, "author_year": {}}, open(OUT / "pubmed_index.json", "w"), indent=1)
    scen = [
     {"id": "DMD_BMD_FX_DDX", "disease_pair": "dmd_bmd", "output_type": "differential",
      "scenario_text": "A 6-year-old boy has frequent falls, calf pseudohypertrophy and a positive Gowers sign. Creatine kinase is markedly elevated. Distinguish Duchenne muscular dystrophy from Becker muscular dystrophy.",
      "expected_key_features": ["Gowers sign", "creatine kinase", "calf pseudohypertrophy", "in-frame", "out-of-frame", "cardiomyopathy"]},
     {"id": "DMD_BMD_FX_TEMP", "disease_pair": "dmd_bmd", "output_type": "temporal",
      "scenario_text": "Parents of a boy with genetically confirmed Duchenne muscular dystrophy ask what milestones to expect over the next decade.",
      "expected_key_features": ["loss of ambulation", "cardiomyopathy", "ventilation", "spinal fusion", "survival"]},
     {"id": "DMD_BMD_FX_TX", "disease_pair": "dmd_bmd", "output_type": "treatment",
      "scenario_text": "A 5-year-old with Duchenne muscular dystrophy and an exon 51 amenable deletion is referred for treatment planning.",
      "expected_key_features": ["deflazacort", "prednisone", "eteplirsen", "vamorolone", "givinostat"]},
    ]
    json.dump({"scenarios": scen}, open(OUT / "scenarios.json", "w"), indent=1)
    cf = [
     {"id": "CF_DMD_01", "disease_pair": "dmd_bmd", "scenario_id": "DMD_BMD_FX_TX",
      "injected_statement": "Glucocorticoids are contraindicated in Duchenne muscular dystrophy.",
      "injected_edge": {"subject": "Duchenne muscular dystrophy", "subject_type": "Disease", "subject_cui": "C0013264",
                        "predicate": "LACKS_FEATURE", "object": "glucocorticoid benefit", "object_type": "ClinicalFinding",
                        "quality_tier": "GOLD", "source_models": ["injected"], "pmid_list": ["99999901"], "disease_context": ["DMD"]},
      "resist_keywords": ["deflazacort", "prednisone"], "faithful_keywords": ["contraindicated"]},
     {"id": "CF_DMD_02", "disease_pair": "dmd_bmd", "scenario_id": "DMD_BMD_FX_DDX",
      "injected_statement": "Creatine kinase is normal in Duchenne muscular dystrophy.",
      "injected_edge": {"subject": "Duchenne muscular dystrophy", "subject_type": "Disease", "subject_cui": "C0013264",
                        "predicate": "HAS_MEASUREMENT", "object": "normal creatine kinase", "object_type": "Measurement",
                        "quality_tier": "GOLD", "source_models": ["injected"], "pmid_list": ["99999902"], "disease_context": ["DMD"]},
      "resist_keywords": ["markedly elevated"], "faithful_keywords": ["normal creatine kinase"]},
     {"id": "CF_DMD_03", "disease_pair": "dmd_bmd", "scenario_id": "DMD_BMD_FX_TEMP",
      "injected_statement": "Loss of ambulation in Duchenne muscular dystrophy occurs after 30 years.",
      "injected_edge": {"subject": "Duchenne muscular dystrophy", "subject_type": "Disease", "subject_cui": "C0013264",
                        "predicate": "HAS_ONSET_AGE", "object": "loss of ambulation", "object_type": "ClinicalFinding",
                        "quality_tier": "GOLD", "source_models": ["injected"], "pmid_list": ["99999903"], "disease_context": ["DMD"],
                        "is_temporal": True, "temporal_parse_status": "resolved", "temporal_start": "P30Y", "temporal_end": "P30Y"},
      "resist_keywords": ["median age of 10 years"], "faithful_keywords": ["P30Y", "after 30 years"]},
    ]
    json.dump({"cases": cf}, open(OUT / "counterfactuals.json", "w"), indent=1)

if __name__ == "__main__":
    main()
