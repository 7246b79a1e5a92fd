#!/usr/bin/env python3
"""Writes the shipped tool documents to data/specs (one file per tool plus
index.json). Output is deterministic; rerun after editing the tables below."""

import argparse
import json
from pathlib import Path

ADVERSE = "adverse events, risks, safety"
ABUSE = "addiction and abuse"
POPULATIONS = "drug usage in patient populations"
ADMIN = "drug administration and handling"
PHARM = "pharmacology"
MECH = "drug use, mechanism, composition"
ID = "id and labeling tools"
CLINICAL = "general clinical annotations"
LAB = "clinical laboratory info"
PATIENT = "general info for patients and relatives"
LINKS = "disease, phenotype, target, drug links"
BIO = "biological annotation tools"
PUBS = "publications"
SEARCH = "search"
TARGET = "target characterization"

DRUG_NAME = ("drug_name", "string", "The brand or generic name of the drug.")

# openFDA label field -> (topic used in tool names, plain-language subject, category).
# Each field yields a lookup tool (drug -> section) and a reverse tool
# (section text -> drugs).
FDA_FIELDS = [
    ("indications_and_usage", "indications", "the approved indications and usage", MECH),
    ("boxed_warning", "boxed_warning", "the boxed warning", ADVERSE),
    ("warnings_and_cautions", "warnings_and_cautions", "warnings and cautions", ADVERSE),
    ("warnings", "warnings", "general warnings", ADVERSE),
    ("precautions", "precautions", "precautions", ADVERSE),
    ("general_precautions", "general_precautions", "general precautions", ADVERSE),
    ("adverse_reactions", "adverse_reactions", "adverse reactions", ADVERSE),
    ("contraindications", "contraindications", "contraindications", ADVERSE),
    ("drug_interactions", "drug_interactions", "known drug interactions", ADVERSE),
    ("drug_and_or_laboratory_test_interactions", "lab_test_interactions",
     "interactions with laboratory tests", LAB),
    ("overdosage", "overdosage", "overdosage information", ADVERSE),
    ("risks", "risks", "risk statements", ADVERSE),
    ("user_safety_warnings", "user_safety_warnings", "user safety warnings", ADVERSE),
    ("safe_handling_warning", "safe_handling_warning", "safe handling warnings", ADMIN),
    ("use_in_specific_populations", "specific_populations", "use in specific populations", POPULATIONS),
    ("pregnancy", "pregnancy", "use during pregnancy", POPULATIONS),
    ("pregnancy_or_breast_feeding", "pregnancy_or_breast_feeding",
     "pregnancy and breast-feeding statements", POPULATIONS),
    ("teratogenic_effects", "teratogenic_effects", "teratogenic effects", POPULATIONS),
    ("nonteratogenic_effects", "nonteratogenic_effects", "nonteratogenic effects", POPULATIONS),
    ("labor_and_delivery", "labor_and_delivery", "use during labor and delivery", POPULATIONS),
    ("nursing_mothers", "nursing_mothers", "use by nursing mothers", POPULATIONS),
    ("pediatric_use", "pediatric_use", "pediatric use", POPULATIONS),
    ("geriatric_use", "geriatric_use", "geriatric use", POPULATIONS),
    ("drug_abuse_and_dependence", "abuse_and_dependence", "drug abuse and dependence", ABUSE),
    ("controlled_substance", "controlled_substance", "the controlled substance schedule", ABUSE),
    ("abuse", "abuse", "abuse potential", ABUSE),
    ("dependence", "dependence", "dependence information", ABUSE),
    ("dosage_and_administration", "dosage", "dosage and administration", ADMIN),
    ("dosage_forms_and_strengths", "dosage_forms", "dosage forms and strengths", ADMIN),
    ("how_supplied", "how_supplied", "how the drug is supplied", ADMIN),
    ("storage_and_handling", "storage", "storage and handling", ADMIN),
    ("instructions_for_use", "instructions_for_use", "instructions for use", ADMIN),
    ("package_label_principal_display_panel", "package_label", "the principal display panel of the package label", ID),
    ("mechanism_of_action", "mechanism_of_action", "the mechanism of action", PHARM),
    ("pharmacodynamics", "pharmacodynamics", "pharmacodynamics", PHARM),
    ("pharmacokinetics", "pharmacokinetics", "pharmacokinetics", PHARM),
    ("clinical_pharmacology", "clinical_pharmacology", "clinical pharmacology", PHARM),
    ("pharmacogenomics", "pharmacogenomics", "pharmacogenomics", PHARM),
    ("nonclinical_toxicology", "nonclinical_toxicology", "nonclinical toxicology", PHARM),
    ("carcinogenesis_and_mutagenesis_and_impairment_of_fertility", "carcinogenesis",
     "carcinogenesis, mutagenesis and impairment of fertility", PHARM),
    ("animal_pharmacology_and_or_toxicology", "animal_pharmacology", "animal pharmacology and toxicology", PHARM),
    ("microbiology", "microbiology", "microbiology", PHARM),
    ("description", "description", "the product description", MECH),
    ("active_ingredient", "active_ingredient", "the active ingredients", MECH),
    ("inactive_ingredient", "inactive_ingredient", "the inactive ingredients", MECH),
    ("purpose", "purpose", "the stated purpose", MECH),
    ("spl_product_data_elements", "product_data_elements", "the product data elements", ID),
    ("recent_major_changes", "recent_major_changes", "recent major label changes", ID),
    ("spl_unclassified_section", "unclassified_section", "unclassified label sections", ID),
    ("clinical_studies", "clinical_studies", "clinical studies", CLINICAL),
    ("references", "references", "label references", PUBS),
    ("laboratory_tests", "laboratory_tests", "recommended laboratory tests", LAB),
    ("information_for_patients", "patient_info", "information for patients", PATIENT),
    ("patient_medication_information", "medication_info", "patient medication information", PATIENT),
    ("spl_patient_package_insert", "package_insert", "the patient package insert", PATIENT),
    ("spl_medguide", "medication_guide", "the medication guide", PATIENT),
    ("ask_doctor", "ask_doctor", "when to ask a doctor", PATIENT),
    ("ask_doctor_or_pharmacist", "ask_doctor_or_pharmacist", "when to ask a doctor or pharmacist", PATIENT),
    ("do_not_use", "do_not_use", "do-not-use statements", PATIENT),
    ("stop_use", "stop_use", "when to stop use", PATIENT),
    ("when_using", "when_using", "what to expect when using the product", PATIENT),
    ("keep_out_of_reach_of_children", "keep_out_of_reach", "keep-out-of-reach-of-children statements", PATIENT),
    ("questions", "questions_contact", "the questions and contact section", PATIENT),
    ("effective_time", "label_effective_time", "the label effective date", ID),
    ("openfda.route", "route", "the route of administration", ADMIN),
    ("openfda.manufacturer_name", "manufacturer", "the manufacturer", ID),
    ("openfda.pharm_class_epc", "pharm_class", "the established pharmacologic class", PHARM),
]

# Lookup names that differ from the get_<topic>_by_drug_name pattern.
LOOKUP_NAMES = {
    "indications_and_usage": "get_indications",
    "adverse_reactions": "get_adverse_reactions",
    "geriatric_use": "get_geriatric_use_info",
}
REVERSE_NAMES = {
    "indications_and_usage": "get_drug_names_by_indication",
}

NAME_FIELDS = ["openfda.brand_name", "openfda.generic_name"]


def prop(name, typ, desc):
    p = {"type": typ, "description": desc}
    if typ == "array":
        p["items"] = {"type": "string"}
    return name, p


def tool(name, description, category, args, mapping):
    props = {}
    required = []
    for a in args:
        n, p = prop(a[0], a[1], a[2])
        props[n] = p
        if len(a) < 4 or a[3]:
            required.append(n)
    return {
        "name": name,
        "description": description,
        "category": category,
        "parameter": {"type": "object", "properties": props, "required": required},
        "mapping": mapping,
    }


def fda_tools():
    out = []
    for field, topic, subject, category in FDA_FIELDS:
        lookup = LOOKUP_NAMES.get(field, f"get_{topic}_by_drug_name")
        out.append(tool(
            lookup,
            f"Retrieve {subject} from the FDA drug label for a given drug name.",
            category,
            [DRUG_NAME],
            {"kind": "fda_search", "search_fields": {"drug_name": "openfda.brand_name"},
             "return_fields": NAME_FIELDS + [field]},
        ))
        reverse = REVERSE_NAMES.get(field, f"get_drug_name_by_{topic}")
        out.append(tool(
            reverse,
            f"Find drugs whose FDA label mentions the given text in {subject}.",
            category,
            [(topic, "string", f"Text to search for in {subject}.")],
            {"kind": "fda_search", "search_fields": {topic: field}, "return_fields": NAME_FIELDS},
        ))
    out.append(tool(
        "get_dosage_and_storage_info",
        "Retrieve dosage, administration and storage instructions from the FDA drug label for a given drug name.",
        ADMIN,
        [DRUG_NAME],
        {"kind": "fda_search", "search_fields": {"drug_name": "openfda.brand_name"},
         "return_fields": NAME_FIELDS + ["dosage_and_administration", "storage_and_handling"]},
    ))
    out.append(tool(
        "get_drug_generic_name",
        "Get the generic name of a drug from its brand name.",
        ID,
        [DRUG_NAME],
        {"kind": "fda_search", "search_fields": {"drug_name": "openfda.brand_name"},
         "return_fields": NAME_FIELDS},
    ))
    out.append(tool(
        "get_drug_brand_names",
        "List the brand names marketed for a generic drug.",
        ID,
        [("generic_name", "string", "The generic name of the drug.")],
        {"kind": "fda_search", "search_fields": {"generic_name": "openfda.generic_name"},
         "return_fields": NAME_FIELDS},
    ))
    out.append(tool(
        "get_drug_application_number",
        "Get the FDA application number and product type for a given drug name.",
        ID,
        [DRUG_NAME],
        {"kind": "fda_search", "search_fields": {"drug_name": "openfda.brand_name"},
         "return_fields": NAME_FIELDS + ["openfda.application_number", "openfda.product_type"]},
    ))
    return out


def gql(name, description, category, args, query, bindings=None):
    if bindings is None:
        bindings = {a[0]: a[0] for a in args}
    return tool(name, description, category, args,
                {"kind": "graphql", "query_text": query, "variable_bindings": bindings})


EFO = ("efoId", "string", "The EFO identifier of the disease, e.g. EFO_0000685.")
ENSEMBL = ("ensemblId", "string", "The Ensembl identifier of the target, e.g. ENSG00000157764.")
CHEMBL = ("chemblId", "string", "The ChEMBL identifier of the drug, e.g. CHEMBL25.")


def disease_q(selection, extra_vars="", extra_args=""):
    return (f"query q($efoId: String!{extra_vars}) {{ disease(efoId: $efoId) {{ id name {selection} }} }}"
            .replace("SELF_ARGS", extra_args))


def target_q(selection):
    return f"query q($ensemblId: String!) {{ target(ensemblId: $ensemblId) {{ id approvedSymbol {selection} }} }}"


def drug_q(selection):
    return f"query q($chemblId: String!) {{ drug(chemblId: $chemblId) {{ id name {selection} }} }}"


def search_q(entity):
    return ("query q($queryString: String!) { search(queryString: $queryString, entityNames: [\"" + entity +
            "\"], page: {index: 0, size: 5}) { hits { id name description entity } } }")


def opentargets_tools():
    t = []
    name_arg = lambda what: ("queryString", "string", f"The {what} name to search for.")
    t.append(gql("get_disease_id_desc", "Find the EFO identifier and description of a disease by its name.",
                 SEARCH, [name_arg("disease")], search_q("disease")))
    t.append(gql("get_target_id_desc", "Find the Ensembl identifier and description of a target gene by its name.",
                 SEARCH, [name_arg("target")], search_q("target")))
    t.append(gql("get_drug_chembl_id_desc", "Find the ChEMBL identifier and description of a drug by its name.",
                 SEARCH, [name_arg("drug")], search_q("drug")))

    disease = [
        ("get_associated_targets", "List targets associated with a disease, with association scores.", LINKS,
         "associatedTargets(page: {index: 0, size: 25}) { count rows { target { id approvedSymbol } score } }"),
        ("get_known_drugs_by_disease", "List drugs in clinical use or trials for a disease.", LINKS,
         "knownDrugs { count rows { drug { id name } phase status mechanismOfAction } }"),
        ("get_disease_phenotypes", "List phenotypes (HPO terms) annotated to a disease.", LINKS,
         "phenotypes(page: {index: 0, size: 25}) { rows { phenotypeHPO { id name } } }"),
        ("get_disease_description", "Get the description of a disease.", BIO, "description"),
        ("get_disease_synonyms", "List the synonyms of a disease.", BIO, "synonyms { relation terms }"),
        ("get_disease_ancestors_parents", "List the parent and ancestor terms of a disease.", BIO,
         "parents { id name } ancestors"),
        ("get_disease_descendants_children", "List the child and descendant terms of a disease.", BIO,
         "children { id name } descendants"),
        ("get_disease_therapeutic_areas", "List the therapeutic areas of a disease.", BIO,
         "therapeuticAreas { id name }"),
        ("get_disease_locations", "List the anatomical locations affected by a disease.", BIO,
         "directLocationIds indirectLocationIds"),
        ("get_disease_db_xrefs", "List database cross-references for a disease.", ID, "dbXRefs"),
        ("get_publications_by_disease", "List publications that mention a disease.", PUBS,
         "literatureOcurrences { count rows { pmid publicationDate } }"),
        ("get_similar_diseases", "List diseases similar to a disease by literature embeddings.", LINKS,
         "similarEntities(size: 10) { id score }"),
        ("get_disease_resolved_ontology", "Get the ontology sources and obsolete terms of a disease.", ID,
         "ontology { isTherapeuticArea sources { name url } } obsoleteTerms { id name }"),
    ]
    for name, desc, cat, sel in disease:
        t.append(gql(name, desc, cat, [EFO], disease_q(sel)))

    t.append(gql("get_evidence_by_target_disease",
                 "List evidence linking a target to a disease, with data source and score.", LINKS,
                 [EFO, ENSEMBL],
                 "query q($efoId: String!, $ensemblId: String!) { disease(efoId: $efoId) { id name "
                 "evidences(ensemblIds: [$ensemblId]) { count rows { datasourceId score } } } }"))

    target = [
        ("get_associated_diseases_by_target", "List diseases associated with a target, with association scores.", LINKS,
         "associatedDiseases(page: {index: 0, size: 25}) { count rows { disease { id name } score } }"),
        ("get_known_drugs_by_target", "List drugs that act on a target.", LINKS,
         "knownDrugs { count rows { drug { id name } phase disease { id name } } }"),
        ("get_target_tractability", "Get small-molecule, antibody and other tractability assessments of a target.",
         TARGET, "tractability { label modality value }"),
        ("get_target_safety_liabilities", "List known safety liabilities of a target.", ADVERSE,
         "safetyLiabilities { event effects { direction dosing } datasource }"),
        ("get_target_expression", "Get tissue RNA and protein expression of a target.", TARGET,
         "expressions { tissue { id label } rna { level value } protein { level } }"),
        ("get_target_subcellular_locations", "List subcellular locations of a target.", TARGET,
         "subcellularLocations { location source }"),
        ("get_target_pathways", "List Reactome pathways that involve a target.", BIO,
         "pathways { pathwayId pathway topLevelTerm }"),
        ("get_target_gene_ontology", "List Gene Ontology annotations of a target.", BIO,
         "geneOntology { term { id name } aspect evidence }"),
        ("get_target_interactions", "List molecular interaction partners of a target.", BIO,
         "interactions(page: {index: 0, size: 25}) { count rows { targetB { id approvedSymbol } score sourceDatabase } }"),
        ("get_target_homologues", "List homologues of a target in other species.", BIO,
         "homologues { speciesName targetGeneSymbol queryPercentageIdentity homologyType }"),
        ("get_target_genetic_constraint", "Get gnomAD genetic constraint scores of a target.", TARGET,
         "geneticConstraint { constraintType oe oeLower oeUpper score }"),
        ("get_target_chemical_probes", "List chemical probes for a target.", TARGET,
         "chemicalProbes { id control drugId mechanismOfAction isHighQuality }"),
        ("get_target_mouse_phenotypes", "List mouse model phenotypes for a target.", TARGET,
         "mousePhenotypes { modelPhenotypeId modelPhenotypeLabel }"),
        ("get_target_synonyms", "List symbol and name synonyms of a target.", ID, "synonyms { label source }"),
        ("get_target_function", "Get the functional description of a target.", TARGET, "functionDescriptions"),
        ("get_target_classes", "List the protein classes of a target.", TARGET, "targetClass { id label level }"),
        ("get_target_hallmarks", "Get cancer hallmark annotations of a target.", TARGET,
         "hallmarks { attributes { name description } cancerHallmarks { label impact description } }"),
        ("get_target_essentiality", "Get gene essentiality screens for a target.", TARGET,
         "isEssential depMapEssentiality { tissueName screens { cellLineName geneEffect } }"),
        ("get_target_enabling_packages", "Get target enabling package information for a target.", TARGET,
         "tep { name uri therapeuticArea }"),
        ("get_target_db_xrefs", "List database cross-references for a target.", ID, "dbXrefs { id source }"),
        ("get_target_genomic_location", "Get the genomic location and biotype of a target.", BIO,
         "biotype genomicLocation { chromosome start end strand }"),
        ("get_target_tissue_specificity", "Get the tissue specificity summary of a target.", TARGET,
         "expressions { tissue { label } rna { zscore } }"),
        ("get_publications_by_target", "List publications that mention a target.", PUBS,
         "literatureOcurrences { count rows { pmid publicationDate } }"),
        ("get_target_pharmacogenomics", "List pharmacogenomic variants in a target.", PHARM,
         "pharmacogenomics { variantRsId genotype phenotypeText drugs { drugId } }"),
    ]
    for name, desc, cat, sel in target:
        t.append(gql(name, desc, cat, [ENSEMBL], target_q(sel)))

    drug = [
        ("get_drug_mechanisms_of_action", "List the mechanisms of action and targets of a drug.", PHARM,
         "mechanismsOfAction { rows { mechanismOfAction actionType targets { id approvedSymbol } } }"),
        ("get_drug_indications_by_chembl", "List diseases a drug is indicated for, with maximum trial phase.",
         LINKS, "indications { count rows { disease { id name } maxPhaseForIndication } }"),
        ("get_drug_adverse_events", "List significant adverse events reported for a drug.", ADVERSE,
         "adverseEvents(page: {index: 0, size: 25}) { count rows { name count logLR } }"),
        ("get_drug_warnings", "List withdrawal and black box warnings of a drug.", ADVERSE,
         "drugWarnings { warningType description toxicityClass country year }"),
        ("get_drug_synonyms", "List the synonyms of a drug.", ID, "synonyms"),
        ("get_drug_trade_names", "List the trade names of a drug.", ID, "tradeNames"),
        ("get_drug_approval_status", "Get whether a drug is approved and its year of first approval.", CLINICAL,
         "isApproved yearOfFirstApproval maximumClinicalTrialPhase"),
        ("get_drug_withdrawal_status", "Get whether a drug has been withdrawn and why.", ADVERSE,
         "hasBeenWithdrawn blackBoxWarning"),
        ("get_drug_linked_targets", "List the targets linked to a drug.", LINKS,
         "linkedTargets { count rows { id approvedSymbol } }"),
        ("get_drug_linked_diseases", "List the diseases linked to a drug.", LINKS,
         "linkedDiseases { count rows { id name } }"),
        ("get_drug_description", "Get the description and molecule type of a drug.", MECH, "description drugType"),
        ("get_drug_cross_references", "List database cross-references for a drug.", ID,
         "crossReferences { source reference }"),
        ("get_drug_parent_child_molecules", "List parent and child molecules of a drug.", MECH,
         "parentMolecule { id name } childMolecules { id name }"),
        ("get_drug_pharmacogenomics", "List pharmacogenomic variants that affect response to a drug.", PHARM,
         "pharmacogenomics { variantRsId genotype phenotypeText target { approvedSymbol } }"),
        ("get_publications_by_drug", "List publications that mention a drug.", PUBS,
         "literatureOcurrences { count rows { pmid publicationDate } }"),
    ]
    for name, desc, cat, sel in drug:
        t.append(gql(name, desc, cat, [CHEMBL], drug_q(sel)))
    return t


def rest(name, description, category, args, template, query=None, static=None):
    return tool(name, description, category, args,
                {"kind": "rest", "endpoint_template": template, "query_bindings": query or {},
                 "static_query": static or {}})


def monarch_tools():
    d2p = "biolink:DiseaseToPhenotypicFeatureAssociation"
    g2d = "biolink:CausalGeneToDiseaseAssociation"
    g2p = "biolink:GeneToPhenotypicFeatureAssociation"
    hpo = ("hpo_id", "string", "The HPO identifier of the phenotype, e.g. HP:0001250.")
    mondo = ("disease_id", "string", "The MONDO identifier of the disease, e.g. MONDO:0005148.")
    gene = ("gene_id", "string", "The HGNC identifier of the gene, e.g. HGNC:1100.")
    limit = ("limit", "integer", "Maximum number of results.", False)
    return [
        rest("get_HPO_ID_by_phenotype", "Find HPO identifiers for a phenotype description.", SEARCH,
             [("query", "string", "The phenotype to search for."), limit], "/v3/api/search",
             {"query": "q", "limit": "limit"}, {"category": "biolink:PhenotypicFeature"}),
        rest("get_phenotype_by_HPO_ID", "Get the name and definition of an HPO phenotype.", BIO, [hpo],
             "/v3/api/entity/{hpo_id}"),
        rest("get_disease_id_by_name_monarch", "Find MONDO identifiers for a disease name.", SEARCH,
             [("query", "string", "The disease to search for."), limit], "/v3/api/search",
             {"query": "q", "limit": "limit"}, {"category": "biolink:Disease"}),
        rest("get_disease_by_MONDO_ID", "Get the name and definition of a MONDO disease.", BIO, [mondo],
             "/v3/api/entity/{disease_id}"),
        rest("get_phenotypes_by_disease_monarch", "List phenotypes associated with a MONDO disease.", LINKS,
             [mondo, limit], "/v3/api/association", {"disease_id": "subject", "limit": "limit"},
             {"category": d2p}),
        rest("get_diseases_by_phenotype", "List diseases associated with an HPO phenotype.", LINKS,
             [hpo, limit], "/v3/api/association", {"hpo_id": "object", "limit": "limit"}, {"category": d2p}),
        rest("get_genes_by_disease", "List genes causally associated with a MONDO disease.", LINKS,
             [mondo, limit], "/v3/api/association", {"disease_id": "object", "limit": "limit"}, {"category": g2d}),
        rest("get_diseases_by_gene", "List diseases causally associated with a gene.", LINKS,
             [gene, limit], "/v3/api/association", {"gene_id": "subject", "limit": "limit"}, {"category": g2d}),
        rest("get_phenotypes_by_gene", "List phenotypes associated with a gene.", LINKS,
             [gene, limit], "/v3/api/association", {"gene_id": "subject", "limit": "limit"}, {"category": g2p}),
        rest("get_gene_id_by_symbol", "Find HGNC identifiers for a gene symbol.", SEARCH,
             [("query", "string", "The gene symbol to search for."), limit], "/v3/api/search",
             {"query": "q", "limit": "limit"}, {"category": "biolink:Gene"}),
        rest("get_orthologs_by_gene", "List orthologous genes in model organisms for a gene.", BIO,
             [gene, limit], "/v3/api/association", {"gene_id": "subject", "limit": "limit"},
             {"category": "biolink:GeneToGeneHomologyAssociation"}),
        rest("get_entity_mappings", "List cross-ontology mappings for an entity.", ID,
             [("entity_id", "string", "A CURIE such as MONDO:0005148 or HP:0001250.")], "/v3/api/mappings",
             {"entity_id": "entity_id"}),
        rest("get_entity_hierarchy", "List the parent and child terms of an ontology entity.", BIO,
             [("entity_id", "string", "A CURIE such as MONDO:0005148 or HP:0001250.")],
             "/v3/api/entity/{entity_id}/hierarchy"),
    ]


EXPECTED_TOTAL = 207


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[2] / "data" / "specs"))
    args = ap.parse_args()

    specs = fda_tools() + opentargets_tools() + monarch_tools()
    names = [s["name"] for s in specs]
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise SystemExit(f"duplicate tool names: {sorted(dupes)}")
    if len(specs) != EXPECTED_TOTAL:
        raise SystemExit(f"expected {EXPECTED_TOTAL} tools, generated {len(specs)}")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("*.json"):
        old.unlink()
    index = []
    for s in sorted(specs, key=lambda s: s["name"]):
        fname = s["name"] + ".json"
        (out / fname).write_text(json.dumps(s, indent=2) + "\n")
        index.append(fname)
    (out / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    print(f"wrote {len(specs)} tools to {out}")


if __name__ == "__main__":
    main()
