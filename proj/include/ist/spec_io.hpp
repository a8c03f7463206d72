#pragma once

// JSON front-ends for intent specs, carriers and model outputs, the JSONL
// record stream, and mask derivation from a spec/carrier pair.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ist/intent_model.hpp"

namespace ist {

inline constexpr std::string_view kFormatVersion = "1";

struct ParseOptions {
  bool lenient = false;                     // unknown fields become warnings
  std::vector<std::string>* warnings = nullptr;
};

using RealizedValues = std::map<DimensionId, ValueRef>;

// One scored model output, as streamed in record files.
struct OutputRecord {
  std::string task_id;
  std::string condition;  // "FULL", "ABL_<id>", perturbation labels, ...
  std::string model_tag;
  EncodingMask mask;
  RealizedValues realized_values;
  int ga = 1;
  double s_icmw = 0.0;
  double f_icmw = 0.0;
  std::optional<std::string> text;

  friend bool operator==(const OutputRecord&, const OutputRecord&) = default;
};

// A raw model output handed to the scorer (no metrics yet). `ga` is set
// when an external judge already produced one.
struct ModelOutput {
  std::string task_id;
  std::string model_tag;
  RealizedValues realized_values;
  std::optional<int> ga;
  std::optional<std::string> text;

  friend bool operator==(const ModelOutput&, const ModelOutput&) = default;
};

struct SpecDocument {
  std::string format_version{kFormatVersion};
  IntentSpec spec;
  std::optional<Carrier> carrier;
  std::vector<OutputRecord> outputs;
};

SpecDocument parse_spec_document(std::string_view text, const ParseOptions& options = {});
IntentSpec parse_intent_spec(std::string_view text, const ParseOptions& options = {});
std::string serialize_intent_spec(const IntentSpec& spec);

Carrier parse_carrier(std::string_view text, const ParseOptions& options = {});
std::string serialize_carrier(const Carrier& carrier);

ModelOutput parse_model_output(std::string_view text, const ParseOptions& options = {});
std::string serialize_model_output(const ModelOutput& output);

// Single JSON object, no trailing newline.
OutputRecord parse_record(std::string_view line, const ParseOptions& options = {});
std::string serialize_record(const OutputRecord& record);

/// m_i = 1 exactly for the leaves the carrier lists. Listing an inner
/// dimension encodes every leaf beneath it. Throws UnknownDimension.
EncodingMask compute_mask(const IntentSpec& spec, const Carrier& carrier);

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct ReadOptions {
  bool fail_fast = false;
  bool lenient = false;
};

// Streaming JSONL reader. Blank lines are skipped; malformed lines are
// collected in errors() (or thrown immediately with fail_fast).
class RecordReader {
 public:
  RecordReader(std::istream& in, ReadOptions options = {});

  std::optional<OutputRecord> next();
  const std::vector<LineError>& errors() const noexcept { return errors_; }

 private:
  std::istream& in_;
  ReadOptions options_;
  std::size_t line_no_ = 0;
  std::vector<LineError> errors_;
};

struct RecordBatch {
  std::vector<OutputRecord> records;
  std::vector<LineError> errors;
};

RecordBatch read_records(const std::filesystem::path& path, ReadOptions options = {});
void write_records(const std::filesystem::path& path, std::span<const OutputRecord> records);
void write_records(std::ostream& out, std::span<const OutputRecord> records);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace ist
