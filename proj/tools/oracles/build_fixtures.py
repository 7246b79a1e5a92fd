#!/usr/bin/env python3
"""Independent oracle for request goldens and cassettes.

Re-derives the wire form of each (tool, arguments) pair from the API
conventions alone (openFDA search syntax, GraphQL JSON POST, Monarch GET with
sorted parameters) and writes:
  tests/fixtures/goldens/*.json     {"tool"|"spec", "arguments", "fda_limit", "expected"}
  tests/fixtures/cassettes/<h>.json {"request", "status", "body"}
The cassette name is the 64-bit FNV-1a of the serialized request.
"""

import json
import re
from pathlib import Path
from urllib.parse import quote

ROOT = Path(__file__).resolve().parents[2]
SPECS = ROOT / "data" / "specs"
FIX = ROOT / "tests" / "fixtures"


def enc(s):
    return quote(s, safe="-._~")


def text(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    return json.dumps(v)


def dumps(obj):
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def fnv1a(data):
    h = 0xCBF29CE484222325
    for b in data.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def request(method, service, path, query="", body="", projection=()):
    return {"method": method, "service": service, "path": path, "query": query, "body": body,
            "accept": "application/json", "projection": list(projection)}


def fda(mapping, args, limit):
    clauses = []
    for arg, field in sorted(mapping["search_fields"].items()):
        v = args[arg]
        if isinstance(v, list):
            clauses.append("(" + "+OR+".join(f'{field}:"{enc(text(x))}"' for x in v) + ")")
        else:
            clauses.append(f'{field}:"{enc(text(v))}"')
    q = "search=" + "+AND+".join(clauses) + f"&limit={limit}"
    return request("GET", "openfda", mapping.get("endpoint", "/drug/label.json"), q, "", mapping["return_fields"])


GQL_VAR = re.compile(r"\$(\w+)\s*:\s*(\[?\w+!?\]?)(!?)")


def coerce(v, typ):
    if typ.startswith("["):
        inner = typ[1:typ.index("]")].rstrip("!")
        return [coerce(x, inner) for x in (v if isinstance(v, list) else [v])]
    if typ == "Int":
        return int(v)
    if typ == "Float":
        return float(v)
    if typ == "String":
        return text(v)
    return v


def graphql(mapping, args):
    header = mapping["query_text"].split("{", 1)[0]
    by_var = {var: arg for arg, var in mapping["variable_bindings"].items()}
    variables = {}
    for name, typ, _ in GQL_VAR.findall(header):
        arg = by_var[name]
        if arg in args:
            variables[name] = coerce(args[arg], typ.rstrip("!"))
    body = dumps({"query": mapping["query_text"], "variables": variables})
    return request("POST", "opentargets", "/api/v4/graphql", "", body)


def rest(mapping, args):
    path = re.sub(r"\{(\w+)\}", lambda m: enc(text(args[m.group(1)])), mapping["endpoint_template"])
    params = {k: [v] for k, v in mapping.get("static_query", {}).items()}
    for arg, param in mapping.get("query_bindings", {}).items():
        if arg in args:
            v = args[arg]
            params[param] = [text(x) for x in v] if isinstance(v, list) else [text(v)]
    q = "&".join(f"{enc(k)}={enc(v)}" for k in sorted(params) for v in params[k])
    return request("GET", "monarch", path, q)


def compile_call(spec, args, limit=5):
    m = spec["mapping"]
    if m["kind"] == "fda_search":
        return fda(m, args, limit)
    if m["kind"] == "graphql":
        return graphql(m, args)
    return rest(m, args)


def spec_named(name):
    return json.loads((SPECS / f"{name}.json").read_text())


INLINE_GQL = {
    "name": "get_targets_batch",
    "description": "Fetch symbols for several targets at once.",
    "category": "target characterization",
    "parameter": {"type": "object",
                  "properties": {"ids": {"type": "array", "items": {"type": "string"}, "description": "Ensembl ids."},
                                 "size": {"type": "integer", "description": "Page size."}},
                  "required": ["ids"]},
    "mapping": {"kind": "graphql",
                "query_text": "query q($ids: [String!]!, $size: Int) { targets(ensemblIds: $ids) { id approvedSymbol } }",
                "variable_bindings": {"ids": "ids", "size": "size"}},
}

GOLDENS = [
    ("fda_brand_name", "get_indications", {"drug_name": "Bizengri"}, 5),
    ("fda_space_in_value", "get_indications", {"drug_name": "Tylenol PM"}, 5),
    ("fda_list_value", "get_indications", {"drug_name": ["Kisunla", "Leqembi"]}, 5),
    ("fda_reverse_lookup", "get_drug_name_by_contraindications", {"contraindications": "MAO inhibitors"}, 5),
    ("fda_multi_return_limit", "get_dosage_and_storage_info", {"drug_name": "Kisunla"}, 10),
    ("graphql_search", "get_disease_id_desc", {"queryString": "Alzheimer's disease"}, 5),
    ("graphql_disease", "get_associated_targets", {"efoId": "MONDO_0004975"}, 5),
    ("graphql_two_variables", "get_evidence_by_target_disease",
     {"efoId": "EFO_0000685", "ensemblId": "ENSG00000232810"}, 5),
    ("graphql_coercion", INLINE_GQL, {"ids": "ENSG00000157764", "size": "10"}, 5),
    ("rest_path_placeholder", "get_phenotype_by_HPO_ID", {"hpo_id": "HP:0001250"}, 5),
    ("rest_static_and_bound", "get_genes_by_disease", {"disease_id": "MONDO:0005148", "limit": 20}, 5),
    ("rest_optional_omitted", "get_HPO_ID_by_phenotype", {"query": "seizure disorder"}, 5),
]


def fda_body(records):
    return dumps({"meta": {"results": {"skip": 0, "limit": 5, "total": len(records)}}, "results": records})


KISUNLA_DOSAGE = (
    "2 DOSAGE AND ADMINISTRATION 2.1 Patient Selection Confirm the presence of amyloid beta pathology prior to "
    "initiating treatment. 2.2 Dosing Instructions The recommended dosage of KISUNLA is 700 mg every four weeks for "
    "the first three doses, followed by 1400 mg every four weeks, administered as an intravenous infusion over "
    "approximately 30 minutes. Consider stopping dosing with KISUNLA based on reduction of amyloid plaques to "
    "minimal levels on amyloid PET imaging.")
BIZENGRI_INDICATIONS = (
    "1 INDICATIONS AND USAGE BIZENGRI is a bispecific HER2- and HER3-directed antibody indicated for the treatment "
    "of adults with advanced, unresectable or metastatic non-small cell lung cancer (NSCLC) harboring a neuregulin "
    "1 (NRG1) gene fusion with disease progression on or after prior systemic therapy, and of adults with advanced, "
    "unresectable or metastatic pancreatic adenocarcinoma harboring a neuregulin 1 (NRG1) gene fusion with disease "
    "progression on or after prior systemic therapy.")

CASSETTES = [
    ("get_dosage_by_drug_name", {"drug_name": "Kisunla"}, 200, fda_body([{
        "set_id": "c4a8f6a1-kisunla", "effective_time": "20240702",
        "openfda": {"brand_name": ["KISUNLA"], "generic_name": ["DONANEMAB-AZBT"]},
        "dosage_and_administration": [KISUNLA_DOSAGE],
        "warnings_and_cautions": ["Amyloid related imaging abnormalities may occur."]}])),
    ("get_indications", {"drug_name": "Bizengri"}, 200, fda_body([{
        "set_id": "7b1e2d0c-bizengri", "effective_time": "20241204",
        "openfda": {"brand_name": ["BIZENGRI"], "generic_name": ["ZENOCUTUZUMAB-ZBCO"]},
        "indications_and_usage": [BIZENGRI_INDICATIONS]}])),
    ("get_indications", {"drug_name": "Notarealdrug"}, 404,
     dumps({"error": {"code": "NOT_FOUND", "message": "No matches found!"}})),
    ("get_disease_id_desc", {"queryString": "Alzheimer disease"}, 200, dumps({"data": {"search": {"hits": [
        {"id": "MONDO_0004975", "name": "Alzheimer disease",
         "description": "A progressive, neurodegenerative disease characterized by loss of function and death of "
                        "nerve cells in several areas of the brain.", "entity": "disease"}]}}})),
    ("get_associated_targets", {"efoId": "MONDO_0004975"}, 200, dumps({"data": {"disease": {
        "id": "MONDO_0004975", "name": "Alzheimer disease", "associatedTargets": {"count": 2, "rows": [
            {"target": {"id": "ENSG00000142192", "approvedSymbol": "APP"}, "score": 0.87},
            {"target": {"id": "ENSG00000080815", "approvedSymbol": "PSEN1"}, "score": 0.85}]}}}})),
    ("get_phenotype_by_HPO_ID", {"hpo_id": "HP:0001250"}, 200, dumps({
        "id": "HP:0001250", "category": "biolink:PhenotypicFeature", "name": "Seizure",
        "description": "A seizure is an intermittent abnormality of nervous system physiology characterised by a "
                       "transient occurrence of signs and/or symptoms due to abnormal excessive or synchronous "
                       "neuronal activity in the brain."})),
]


def main():
    gdir = FIX / "goldens"
    gdir.mkdir(parents=True, exist_ok=True)
    for old in gdir.glob("*.json"):
        old.unlink()
    for i, (label, tool, args, limit) in enumerate(GOLDENS, 1):
        spec = spec_named(tool) if isinstance(tool, str) else tool
        doc = {"label": label}
        if isinstance(tool, str):
            doc["tool"] = tool
        else:
            doc["spec"] = tool
        doc["arguments"] = args
        doc["fda_limit"] = limit
        doc["expected"] = dumps(compile_call(spec, args, limit))
        (gdir / f"{i:02d}_{label}.json").write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")

    cdir = FIX / "cassettes"
    cdir.mkdir(parents=True, exist_ok=True)
    for old in cdir.glob("*.json"):
        old.unlink()
    for tool, args, status, body in CASSETTES:
        req = compile_call(spec_named(tool), args)
        name = fnv1a(dumps(req))
        doc = {"request": req, "status": status, "body": body}
        (cdir / f"{name}.json").write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {len(GOLDENS)} goldens and {len(CASSETTES)} cassettes")


if __name__ == "__main__":
    main()
