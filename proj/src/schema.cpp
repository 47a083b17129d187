#include "vulnscreen/schema.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "vulnscreen/errors.hpp"

namespace vulnscreen {

namespace {

constexpr std::array<const char*, 8> kFactorGroups = {
    "demographics",     "family_relations", "depression_stress", "peer_influence",
    "career",           "curiosity",        "personality",       "religion"};

std::uint64_t fnv1a64(const std::string& s, std::uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// Canonical content hash: question order is semantic (codes are positional),
// whitespace and field order in the file are not.
std::string compute_fingerprint(const std::vector<QuestionSpec>& questions, const TargetSpec& target) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a64("v1", h);
    h = fnv1a64(target.negative_class + '\x1f' + target.positive_class + '\x1e', h);
    for (const auto& q : questions) {
        h = fnv1a64(q.id + '\x1f', h);
        h = fnv1a64(std::string(to_string(q.kind)) + '\x1f', h);
        for (const auto& label : q.categories) h = fnv1a64(label + '\x1f', h);
        h = fnv1a64("\x1e", h);
    }
    return to_hex(h);
}

void validate(const std::vector<QuestionSpec>& questions, const TargetSpec& target) {
    if (questions.empty()) throw ValidationError("schema defines no questions");
    if (target.negative_class == target.positive_class)
        throw ValidationError("target classes must be distinct");

    std::unordered_set<std::string> seen_ids;
    for (const auto& q : questions) {
        if (q.id.empty()) throw ValidationError("question with empty id");
        if (!seen_ids.insert(q.id).second) throw ValidationError("duplicate question id: " + q.id);

        const auto expected = static_cast<std::size_t>(category_count(q.kind));
        if (q.categories.size() != expected) {
            throw ValidationError("question " + q.id + ": kind " + to_string(q.kind) + " requires " +
                                  std::to_string(expected) + " categories, got " +
                                  std::to_string(q.categories.size()));
        }
        std::unordered_set<std::string> seen_labels;
        for (const auto& label : q.categories) {
            if (!seen_labels.insert(label).second)
                throw ValidationError("question " + q.id + ": duplicate category label '" + label + "'");
        }
        if (std::find(kFactorGroups.begin(), kFactorGroups.end(), q.factor_group) == kFactorGroups.end())
            throw ValidationError("question " + q.id + ": unknown factor_group '" + q.factor_group + "'");
    }
}

}  // namespace

const char* to_string(QuestionKind kind) {
    return kind == QuestionKind::Binary ? "binary" : "likert3";
}

QuestionKind question_kind_from_string(const std::string& s) {
    if (s == "binary") return QuestionKind::Binary;
    if (s == "likert3") return QuestionKind::Likert3;
    throw ParseError("unknown question kind: '" + s + "'");
}

SurveySchema::SurveySchema(std::vector<QuestionSpec> questions, TargetSpec target)
    : questions_(std::move(questions)), target_(std::move(target)) {
    validate(questions_, target_);
    for (Index i = 0; i < static_cast<Index>(questions_.size()); ++i)
        index_by_id_[questions_[static_cast<std::size_t>(i)].id] = i;
    fingerprint_ = compute_fingerprint(questions_, target_);
}

bool SurveySchema::has_question(const std::string& id) const {
    return index_by_id_.count(id) != 0;
}

Index SurveySchema::question_index(const std::string& id) const {
    auto it = index_by_id_.find(id);
    if (it == index_by_id_.end()) throw ValidationError("unknown question: '" + id + "'");
    return it->second;
}

const QuestionSpec& SurveySchema::question(const std::string& id) const {
    return questions_[static_cast<std::size_t>(question_index(id))];
}

int SurveySchema::encode_answer(const std::string& question_id, const std::string& answer_label) const {
    const QuestionSpec& q = question(question_id);
    auto it = std::find(q.categories.begin(), q.categories.end(), answer_label);
    if (it == q.categories.end())
        throw ValidationError("question " + question_id + ": unknown answer label '" + answer_label + "'");
    return static_cast<int>(it - q.categories.begin());
}

const std::string& SurveySchema::decode_answer(const std::string& question_id, int code) const {
    const QuestionSpec& q = question(question_id);
    if (code < 0 || code >= static_cast<int>(q.categories.size()))
        throw ValidationError("question " + question_id + ": code " + std::to_string(code) +
                              " out of range");
    return q.categories[static_cast<std::size_t>(code)];
}

int SurveySchema::encode_label(const std::string& label) const {
    if (label == target_.negative_class || label == "0") return 0;
    if (label == target_.positive_class || label == "1") return 1;
    throw ValidationError("unknown class label '" + label + "'");
}

const std::string& SurveySchema::decode_label(int value) const {
    if (value == 0) return target_.negative_class;
    if (value == 1) return target_.positive_class;
    throw ValidationError("class value must be 0 or 1, got " + std::to_string(value));
}

SurveySchema parse_schema(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schema: ") + e.what());
    }

    try {
        if (!doc.is_object()) throw ParseError("schema: top level must be an object");
        if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer() ||
            doc["schema_version"].get<int>() != 1)
            throw ParseError("schema: schema_version must be 1");
        if (!doc.contains("questions") || !doc["questions"].is_array())
            throw ParseError("schema: missing questions array");

        TargetSpec target;
        if (doc.contains("target")) {
            const auto& t = doc["target"];
            if (t.contains("name")) target.name = t["name"].get<std::string>();
            const auto& classes = t.at("classes");
            if (!classes.is_array() || classes.size() != 2)
                throw ParseError("schema: target.classes must list exactly two classes");
            target.negative_class = classes[0].get<std::string>();
            target.positive_class = classes[1].get<std::string>();
        }

        std::vector<QuestionSpec> questions;
        questions.reserve(doc["questions"].size());
        for (const auto& jq : doc["questions"]) {
            QuestionSpec q;
            q.id = jq.at("id").get<std::string>();
            q.text = jq.at("text").get<std::string>();
            q.kind = question_kind_from_string(jq.at("kind").get<std::string>());
            q.categories = jq.at("categories").get<std::vector<std::string>>();
            q.factor_group = jq.at("factor_group").get<std::string>();
            questions.push_back(std::move(q));
        }
        return SurveySchema(std::move(questions), std::move(target));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schema: ") + e.what());
    }
}

SurveySchema load_schema(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open schema file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_schema(buf.str());
}

}  // namespace vulnscreen
