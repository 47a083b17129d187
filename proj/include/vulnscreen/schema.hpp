#ifndef VULNSCREEN_SCHEMA_HPP
#define VULNSCREEN_SCHEMA_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "vulnscreen/types.hpp"

namespace vulnscreen {

enum class QuestionKind { Binary, Likert3 };

const char* to_string(QuestionKind kind);
QuestionKind question_kind_from_string(const std::string& s);

// Number of answer categories a question kind admits.
inline int category_count(QuestionKind kind) { return kind == QuestionKind::Binary ? 2 : 3; }

struct QuestionSpec {
    std::string id;
    std::string text;
    QuestionKind kind = QuestionKind::Likert3;
    // Ordered answer labels; the category code of a label is its position.
    // Likert answer sets must be listed in semantic (ordinal) order.
    std::vector<std::string> categories;
    std::string factor_group;
};

struct TargetSpec {
    std::string name = "label";
    std::string negative_class = "healthy";   // encoded as 0
    std::string positive_class = "addicted";  // encoded as 1
};

// Immutable questionnaire definition. Safe for shared concurrent reads.
class SurveySchema {
public:
    SurveySchema(std::vector<QuestionSpec> questions, TargetSpec target);

    const std::vector<QuestionSpec>& questions() const { return questions_; }
    const TargetSpec& target() const { return target_; }

    // Stable content hash covering question order, ids, kinds, category
    // labels and the target classes. Question texts and factor groups are
    // reporting metadata and do not participate.
    const std::string& fingerprint() const { return fingerprint_; }

    bool has_question(const std::string& id) const;
    Index question_index(const std::string& id) const;
    const QuestionSpec& question(const std::string& id) const;

    // Category code of `answer_label` for question `question_id` (0-based
    // position in the question's category list).
    int encode_answer(const std::string& question_id, const std::string& answer_label) const;
    const std::string& decode_answer(const std::string& question_id, int code) const;

    // Maps a label cell to 0/1. Accepts the class names and "0"/"1".
    int encode_label(const std::string& label) const;
    const std::string& decode_label(int value) const;

private:
    std::vector<QuestionSpec> questions_;
    TargetSpec target_;
    std::unordered_map<std::string, Index> index_by_id_;
    std::string fingerprint_;
};

// Reads and validates a schema file (format documented in docs/formats.md).
SurveySchema load_schema(const std::string& path);

// Same, from in-memory text.
SurveySchema parse_schema(const std::string& text);

}  // namespace vulnscreen

#endif  // VULNSCREEN_SCHEMA_HPP
