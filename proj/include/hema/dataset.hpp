#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hema {

enum class DatasetKind { ALL_IMAGE, ALL_IDB1 };

// Source labels per dataset plus the two merged labels. {Normal, Cancer}
// double as ALL-IDB1 source labels and as merge targets.
enum class ClassLabel { Benign, Early, Pre, Pro, Normal, Cancer };

enum class Split { train, val, test };

const char* to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& s);
const char* to_string(ClassLabel label);
ClassLabel class_label_from_string(const std::string& s);
const char* to_string(Split split);
Split split_from_string(const std::string& s);

// Class directories each dataset kind is allowed to contain.
const std::vector<ClassLabel>& source_labels(DatasetKind kind);

struct SampleRecord {
    std::string sample_id;  // "<kind>/<class>/<filename>", stable across machines
    std::filesystem::path path;  // absolute at runtime, relative on disk
    DatasetKind source_dataset = DatasetKind::ALL_IMAGE;
    ClassLabel original_class = ClassLabel::Benign;
    std::optional<ClassLabel> mapped_class;
    std::optional<Split> split;

    // Counting key: mapped class once merging has happened.
    ClassLabel count_class() const { return mapped_class.value_or(original_class); }
};

struct DatasetManifest {
    std::vector<SampleRecord> records;
    std::map<std::string, std::size_t> class_counts;  // label name -> count
    std::string created_with;
    std::vector<std::string> warnings;

    // Rebuilds class_counts from the records, preserving zero-count keys.
    void recount();
};

struct IngestOptions {
    // When set, every file must decode; off by default because decoding a
    // full corpus is expensive and count validation does not need pixels.
    bool verify_decode = false;
};

// One record per image file under <root>/<ClassName>/, sorted by path.
// Unknown class directories and unaccepted/unreadable files are errors;
// empty class directories only produce warnings.
DatasetManifest ingest_dataset(const std::filesystem::path& root, DatasetKind kind,
                               const IngestOptions& options = {});

DatasetManifest empty_manifest();

// Applies class_map to every record of both inputs and concatenates them,
// sorted by sample_id. The map must cover every original class present and
// may only target {Normal, Cancer}.
DatasetManifest merge_manifests(const DatasetManifest& a, const DatasetManifest& b,
                                const std::map<ClassLabel, ClassLabel>& class_map);

struct SplitRatios {
    double train = 0.7;
    double val = 0.15;
    double test = 0.15;
};

struct SplitAssignment {
    SplitRatios ratios;
    std::uint64_t seed = 0;
    std::map<std::string, Split> by_sample;  // sample_id -> split
    std::map<std::string, std::map<std::string, std::size_t>> per_split_counts;
};

// Deterministic stratified assignment per mapped class using
// largest-remainder rounding. Requires positive ratios summing to 1 and a
// mapped class on every record; a class smaller than the number of splits
// is an error.
SplitAssignment stratified_split(const DatasetManifest& manifest, const SplitRatios& ratios,
                                 std::uint64_t seed);

void apply_split(DatasetManifest& manifest, const SplitAssignment& assignment);

std::vector<SampleRecord> records_in_split(const DatasetManifest& manifest, Split split);

struct ValidationEntry {
    std::string class_name;
    std::optional<std::size_t> expected;
    std::optional<std::size_t> actual;
    long long delta = 0;  // actual - expected, when both present
    bool ok = false;
};

struct ValidationReport {
    std::vector<ValidationEntry> entries;
    bool pass = false;
    std::vector<std::string> warnings;
};

// Mismatches are report outcomes, never errors. Empty expectations pass
// vacuously with a warning.
ValidationReport validate_manifest(const DatasetManifest& manifest,
                                   const std::map<std::string, std::size_t>& expected);

// JSON persistence; paths are stored relative to the manifest location.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& file);
DatasetManifest load_manifest(const std::filesystem::path& file);

}  // namespace hema
