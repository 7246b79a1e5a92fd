#include "toolverse/datagen.hpp"
#include "toolverse/error.hpp"

namespace toolverse {

std::string_view question_type_name(QuestionType t) noexcept {
  switch (t) {
    case QuestionType::kDrugCentered: return "drug_centered";
    case QuestionType::kDiseaseCentered: return "disease_centered";
    case QuestionType::kToolChain: return "tool_chain";
  }
  return "drug_centered";
}

QuestionType parse_question_type(std::string_view s) {
  for (auto t : {QuestionType::kDrugCentered, QuestionType::kDiseaseCentered, QuestionType::kToolChain}) {
    if (question_type_name(t) == s) return t;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown question type '" + std::string(s) + "'");
}

Json question_record_to_json(const QuestionRecord& r) {
  Json out = Json::object();
  out["id"] = r.id;
  out["question"] = r.question;
  if (r.options) out["options"] = *r.options;
  out["ground_truth"] = r.ground_truth;
  out["explanation"] = r.explanation;
  out["question_type"] = std::string(question_type_name(r.type));
  out["reference_info"] = r.reference_info;
  out["initial_tools"] = r.initial_tools;
  return out;
}

QuestionRecord question_record_from_json(const Json& doc) {
  QuestionRecord r;
  try {
    r.id = doc.at("id").get<std::string>();
    r.question = doc.at("question").get<std::string>();
    if (doc.contains("options") && !doc["options"].is_null()) r.options = doc["options"].get<Options>();
    r.ground_truth = doc.at("ground_truth").get<std::string>();
    r.explanation = doc.value("explanation", "");
    r.type = parse_question_type(doc.value("question_type", "drug_centered"));
    r.reference_info = doc.value("reference_info", Json::object());
    r.initial_tools = doc.value("initial_tools", std::vector<std::string>{});
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("malformed question record: ") + e.what());
  }
  check_question_record(r);
  return r;
}

namespace {

bool has_content(const Json& v) {
  if (v.is_string()) return !trim(v.get<std::string>()).empty();
  if (v.is_array() || v.is_object()) {
    for (const auto& x : v) {
      if (has_content(x)) return true;
    }
    return false;
  }
  return !v.is_null();
}

}  // namespace

void check_question_record(const QuestionRecord& r) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kSchemaViolation, "question " + r.id + ": " + what);
  };
  if (trim(r.question).empty()) fail("empty question");
  if (trim(r.ground_truth).empty()) fail("empty ground truth");
  if (r.options) {
    if (r.options->size() < 2 || r.options->size() > 5) fail("options must have 2 to 5 entries");
    if (!r.options->count(r.ground_truth)) fail("ground truth '" + r.ground_truth + "' is not an option");
  }
  if (!has_content(r.reference_info)) fail("empty reference information");
}

std::string information_extractor_prompt(const std::string& disease_info, const Json& drug_info) {
  return "You are provided the following information:\n"
         "- Disease Information: These phenotypes or symptoms in the following disease-related information will be "
         "used to construct a patient profile. " +
         disease_info +
         "\n- Paired Drug Information: Here is a side-by-side comparison of multiple drug options that help in "
         "designing design patient conditions. Consider the side effects, drug interactions, contraindications, "
         "and other aspects of these drugs in deciding which patient-specific factors would require someone to "
         "take one drug instead of the other options. For example, one drug may be a better option than the "
         "others given specific adverse drug-drug interactions, warnings, age restrictions, patient population "
         "restrictions, pregnancy considerations, and contraindications. Include such factors in the constructed "
         "patient profile to make one drug the definitive correct answer. " +
         drug_info.dump() +
         "\n\nGenerate a comparison analysis of the selected drugs based on the provided information. Show the "
         "differences between the drugs and provide evidence for the differences.";
}

namespace {

constexpr std::string_view kFormatOutline =
    "{\"question\": \"...\", \"options\": {\"A\": \"...\", \"B\": \"...\", \"C\": \"...\", \"D\": \"...\"}, "
    "\"answer\": \"<option letter, or the answer text when there are no options>\", \"explanation\": \"...\"}";

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

}  // namespace

std::string question_generator_prompt(QuestionType type, const QuestionSources& s, const std::string& comparison) {
  switch (type) {
    case QuestionType::kDiseaseCentered:
      return "You are an assistant specializing in creating advanced biomedical multiple-choice questions focused on "
             "drug treatments given various patient-specific information like diseases, phenotypes, and genetic "
             "variation.\n\nGuidelines:\n"
             "- Frame questions around patient case scenarios, where a patient is diagnosed with a disease or "
             "exhibits specific phenotypes, and the goal is to identify the most suitable treatment. You may also "
             "provide protein targets or genes. If additional info is given in the Personalized Information section "
             "below, incorporate this info into the profile being constructed.\n"
             "- Construct questions and answer choices that compare multiple similar drug treatments and select the "
             "most suitable one given the patient's particular conditions. Incorrect answer choices could be drugs "
             "indicated for the disease but unsuitable for this particular patient due to factors like age, "
             "comorbidities, or dosage considerations. The correct answer should be the most appropriate drug for "
             "the patient's specific profile.\n"
             "- Selected Tools: Generate questions related to these functions. " +
             join(s.selected_tools, ", ") +
             "\n- Disease Information: Use phenotypes or symptoms in the following disease-related information to "
             "construct the patient profile. " +
             s.disease_info +
             "\n- Personalized Information: When constructing the patient profile, use the following analysis of "
             "the side-by-side drug comparison. Consider the side effects, drug interactions, contraindications, "
             "and other aspects of these drugs in deciding which patient-specific factors would require someone to "
             "take one drug instead of the other options. For example, one drug may be a better option than the "
             "others given specific adverse drug-drug interactions, warnings, age restrictions, patient population "
             "restrictions, pregnancy considerations, and contraindications. Include such factors in the "
             "constructed patient profile to make one drug the definitive correct answer.\n"
             "Drug information: " +
             s.drug_info.dump() + "\nDrug comparison analysis: " + comparison +
             "\n\nGenerate a question, answer, and explanation according to this format:\n" +
             std::string(kFormatOutline);
    case QuestionType::kToolChain:
      return "You are a helpful assistant for generating expert-level biomedical questions. Based on the given "
             "functions, generate a single independent question that focuses on the given drug. The question "
             "should be specific, diverse, and framed in multiple ways, requiring the use of as many functions as "
             "possible. Do not write a long question; break up the question into multiple sentences if needed. Do "
             "not include details that a scientist, physician, or patient would not know (e.g., ontology IDs like "
             "MONDO, EFO, CHEMBL, Ensembl/ENS).\n\nUse only the following information:\n"
             "1. Functions that can retrieve information related to the drug: " +
             join(s.chain_descriptions, "\n") + "\n2. Related information from functions: " + s.tool_info.dump() +
             "\n3. Related information from PrimeKG interactions: " + s.kg_info +
             "\n\nGenerate a question, answer, and explanation according to this format:\n" +
             std::string(kFormatOutline);
    case QuestionType::kDrugCentered:
      break;
  }
  return "You are a helpful assistant to generate meaningful and challenging multi-choice questions for expert "
         "biomedical researchers. Formulate biomedical questions and generate answers using only the drug name and "
         "field information provided below:\n"
         "- Drug generic name: " +
         s.generic_name + "\n- Drug brand name: " + s.brand_name +
         "\n- Specific field of information for the drug (e.g., contraindications): " + s.field_name + ": " +
         s.field_text +
         "\n\nOther guidelines:\n"
         "- Generate multiple, different questions to utilize all of the provided information. Make sure the "
         "questions do not overlap in content.\n"
         "- Formulate questions that can be answered without needing additional information beyond the field "
         "information provided.\n"
         "- Ask questions in different ways. Don't always start with \"What\" and \"Which\".\n\n"
         "Generate a question, answer, and explanation according to this format:\n" +
         std::string(kFormatOutline);
}

QuestionRecord generate_question(QuestionType type, const QuestionSources& sources, ChatService& chat, Rng& rng) {
  QuestionRecord r;
  r.type = type;
  r.initial_tools = sources.selected_tools;
  std::string comparison;
  switch (type) {
    case QuestionType::kDrugCentered:
      if (trim(sources.field_text).empty()) throw Error(ErrorCode::kPrecondition, "no field text");
      r.reference_info = {{"generic_name", sources.generic_name},
                          {"brand_name", sources.brand_name},
                          {"field", sources.field_name},
                          {"text", sources.field_text}};
      break;
    case QuestionType::kDiseaseCentered: {
      if (trim(sources.disease_info).empty() || sources.drug_info.empty()) {
        throw Error(ErrorCode::kPrecondition, "disease-centered questions need disease and drug information");
      }
      ChatRequest req;
      req.messages.push_back({Role::kUser, information_extractor_prompt(sources.disease_info, sources.drug_info)});
      comparison = trim(chat.chat(req));
      r.reference_info = {
          {"disease", sources.disease_info}, {"drugs", sources.drug_info}, {"comparison", comparison}};
      break;
    }
    case QuestionType::kToolChain:
      if (sources.chain_descriptions.empty()) throw Error(ErrorCode::kPrecondition, "empty tool chain");
      r.reference_info = {{"tools", sources.chain_descriptions}, {"tool_info", sources.tool_info}, {"kg", sources.kg_info}};
      break;
  }

  ChatRequest req;
  req.messages.push_back({Role::kUser, question_generator_prompt(type, sources, comparison)});
  auto reply = chat.chat(req);
  auto doc = find_json_value(reply);
  if (!doc || !doc->is_object()) throw Error(ErrorCode::kParse, "question generation is not a JSON object");
  try {
    r.question = doc->at("question").get<std::string>();
    r.ground_truth = trim(doc->at("answer").get<std::string>());
    r.explanation = doc->value("explanation", "");
    if (doc->contains("options") && (*doc)["options"].is_object() && !(*doc)["options"].empty()) {
      r.options = (*doc)["options"].get<Options>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed question generation: ") + e.what());
  }
  if (r.options) {
    if (auto letter = extract_choice_letter(r.ground_truth, *r.options)) r.ground_truth = *letter;
  }
  r.id = "q-" + rng.alnum_id(10);
  try {
    check_question_record(r);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  return r;
}

std::string question_check_prompt(const std::string& check, const QuestionRecord& record) {
  std::string task;
  if (check == "grounding") {
    task = "Check knowledge grounding: is every fact used by the question, the answer and the explanation stated "
           "in the reference information?";
  } else if (check == "answerability") {
    task = "Check answerability: can the question be answered adequately using only the reference information?";
  } else if (check == "reasonableness") {
    task = "Check reasonableness: is the question meaningful, and does the explanation correctly justify the "
           "answer?";
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown question check '" + check + "'");
  }
  std::string options = record.options ? "\nOptions:\n" + render_options(*record.options) : "";
  return task + "\n\nQuestion: " + record.question + options + "\nAnswer: " + record.ground_truth +
         "\nExplanation: " + record.explanation + "\nReference information: " + record.reference_info.dump() +
         "\n\nReply with PASS or FAIL as the first word, then one sentence of justification.";
}

QuestionEvaluation evaluate_question(const QuestionRecord& record, ChatService& chat) {
  QuestionEvaluation out;
  out.pass = true;
  for (const std::string check : {"grounding", "answerability", "reasonableness"}) {
    CheckVerdict v{check, "inconclusive", {}};
    try {
      ChatRequest req;
      req.messages.push_back({Role::kUser, question_check_prompt(check, record)});
      auto reply = chat.chat(req);
      v.detail = trim(reply);
      if (auto verdict = parse_pass_fail(reply)) v.verdict = *verdict ? "pass" : "fail";
    } catch (const Error& e) {
      v.detail = e.what();
    }
    out.pass = out.pass && v.verdict == "pass";
    out.checks.push_back(std::move(v));
  }
  return out;
}

}  // namespace toolverse
