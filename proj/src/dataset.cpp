#include "hema/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "hema/image_io.hpp"
#include "hema/rng.hpp"
#include "hema/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hema {

const char* to_string(DatasetKind kind) {
    switch (kind) {
    case DatasetKind::ALL_IMAGE: return "ALL_IMAGE";
    case DatasetKind::ALL_IDB1: return "ALL_IDB1";
    }
    return "?";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
    if (s == "ALL_IMAGE") return DatasetKind::ALL_IMAGE;
    if (s == "ALL_IDB1") return DatasetKind::ALL_IDB1;
    throw std::invalid_argument("unknown dataset kind: " + s);
}

const char* to_string(ClassLabel label) {
    switch (label) {
    case ClassLabel::Benign: return "Benign";
    case ClassLabel::Early: return "Early";
    case ClassLabel::Pre: return "Pre";
    case ClassLabel::Pro: return "Pro";
    case ClassLabel::Normal: return "Normal";
    case ClassLabel::Cancer: return "Cancer";
    }
    return "?";
}

ClassLabel class_label_from_string(const std::string& s) {
    if (s == "Benign") return ClassLabel::Benign;
    if (s == "Early") return ClassLabel::Early;
    if (s == "Pre") return ClassLabel::Pre;
    if (s == "Pro") return ClassLabel::Pro;
    if (s == "Normal") return ClassLabel::Normal;
    if (s == "Cancer") return ClassLabel::Cancer;
    throw std::invalid_argument("unknown class label: " + s);
}

const char* to_string(Split split) {
    switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "?";
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw std::invalid_argument("unknown split: " + s);
}

const std::vector<ClassLabel>& source_labels(DatasetKind kind) {
    static const std::vector<ClassLabel> all_image = {
        ClassLabel::Benign, ClassLabel::Early, ClassLabel::Pre, ClassLabel::Pro};
    static const std::vector<ClassLabel> all_idb1 = {ClassLabel::Normal, ClassLabel::Cancer};
    return kind == DatasetKind::ALL_IMAGE ? all_image : all_idb1;
}

void DatasetManifest::recount() {
    for (auto& [name, count] : class_counts) count = 0;
    for (const auto& record : records) {
        ++class_counts[to_string(record.count_class())];
    }
}

DatasetManifest empty_manifest() {
    DatasetManifest m;
    m.created_with = tool_id();
    return m;
}

DatasetManifest ingest_dataset(const fs::path& root, DatasetKind kind,
                               const IngestOptions& options) {
    if (!fs::exists(root) || !fs::is_directory(root)) {
        throw std::runtime_error("dataset root does not exist: " + root.string());
    }

    const auto& allowed = source_labels(kind);
    DatasetManifest manifest = empty_manifest();

    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) {
            manifest.warnings.push_back("ignoring non-directory entry: " +
                                        entry.path().filename().string());
            continue;
        }
        class_dirs.push_back(entry.path());
    }
    std::sort(class_dirs.begin(), class_dirs.end());

    std::vector<std::string> bad_files;
    for (const auto& dir : class_dirs) {
        const std::string class_name = dir.filename().string();
        ClassLabel label;
        try {
            label = class_label_from_string(class_name);
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("unknown class directory: " + class_name +
                                     " (dataset " + to_string(kind) + ")");
        }
        if (std::find(allowed.begin(), allowed.end(), label) == allowed.end()) {
            throw std::runtime_error("class directory '" + class_name +
                                     "' is not valid for dataset " + to_string(kind));
        }

        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (!name.empty() && name.front() == '.') continue;
            if (!has_accepted_image_extension(entry.path())) {
                bad_files.push_back(entry.path().string() + " (unaccepted format)");
                continue;
            }
            if (options.verify_decode && !can_decode_image(entry.path())) {
                bad_files.push_back(entry.path().string() + " (decode failed)");
                continue;
            }
            files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());

        manifest.class_counts[class_name] = 0;  // keep zero-count classes visible
        if (files.empty()) {
            manifest.warnings.push_back("class directory is empty: " + class_name);
        }
        for (const auto& file : files) {
            SampleRecord record;
            record.sample_id = std::string(to_string(kind)) + "/" + class_name + "/" +
                               file.filename().string();
            record.path = fs::absolute(file);
            record.source_dataset = kind;
            record.original_class = label;
            manifest.records.push_back(std::move(record));
        }
    }

    if (!bad_files.empty()) {
        std::string msg = "unreadable image files:";
        for (const auto& f : bad_files) msg += "\n  " + f;
        throw std::runtime_error(msg);
    }

    std::sort(manifest.records.begin(), manifest.records.end(),
              [](const SampleRecord& a, const SampleRecord& b) { return a.path < b.path; });
    manifest.recount();
    return manifest;
}

DatasetManifest merge_manifests(const DatasetManifest& a, const DatasetManifest& b,
                                const std::map<ClassLabel, ClassLabel>& class_map) {
    for (const auto& [from, to] : class_map) {
        if (to != ClassLabel::Normal && to != ClassLabel::Cancer) {
            throw std::invalid_argument(std::string("class_map target must be Normal or Cancer, got ") +
                                        to_string(to));
        }
    }

    DatasetManifest merged = empty_manifest();
    merged.records.reserve(a.records.size() + b.records.size());

    std::set<std::string> seen_ids;
    auto absorb = [&](const DatasetManifest& src) {
        for (const auto& record : src.records) {
            const auto it = class_map.find(record.original_class);
            if (it == class_map.end()) {
                throw std::runtime_error(std::string("unmapped class: ") +
                                         to_string(record.original_class));
            }
            if (!seen_ids.insert(record.sample_id).second) {
                throw std::runtime_error("sample_id collision across inputs: " + record.sample_id);
            }
            SampleRecord out = record;
            out.mapped_class = it->second;
            merged.records.push_back(std::move(out));
        }
        // propagate zero-count classes through the map
        for (const auto& [name, count] : src.class_counts) {
            const auto it = class_map.find(class_label_from_string(name));
            if (it == class_map.end()) {
                throw std::runtime_error("unmapped class: " + name);
            }
            merged.class_counts.emplace(to_string(it->second), 0);
        }
        for (const auto& warning : src.warnings) merged.warnings.push_back(warning);
    };
    absorb(a);
    absorb(b);

    std::sort(merged.records.begin(), merged.records.end(),
              [](const SampleRecord& x, const SampleRecord& y) { return x.sample_id < y.sample_id; });
    merged.recount();
    return merged;
}

SplitAssignment stratified_split(const DatasetManifest& manifest, const SplitRatios& ratios,
                                 std::uint64_t seed) {
    const double sum = ratios.train + ratios.val + ratios.test;
    if (ratios.train <= 0.0 || ratios.val <= 0.0 || ratios.test <= 0.0) {
        throw std::invalid_argument("split ratios must all be positive");
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split ratios must sum to 1");
    }

    // group record indices per mapped class, in manifest order
    std::map<std::string, std::vector<std::size_t>> per_class;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        const auto& record = manifest.records[i];
        if (!record.mapped_class) {
            throw std::invalid_argument("stratified_split requires mapped_class on every record (" +
                                        record.sample_id + " has none)");
        }
        per_class[to_string(*record.mapped_class)].push_back(i);
    }

    const double ratio_of[3] = {ratios.train, ratios.val, ratios.test};
    const Split split_of[3] = {Split::train, Split::val, Split::test};

    SplitAssignment assignment;
    assignment.ratios = ratios;
    assignment.seed = seed;

    for (auto& [class_name, indices] : per_class) {
        if (indices.size() < 3) {
            throw std::runtime_error("class '" + class_name + "' has " +
                                     std::to_string(indices.size()) +
                                     " samples, fewer than the 3 splits");
        }
        // order within the class is randomized, but stable for a fixed
        // (seed, class): records were sorted by sample_id upstream
        std::sort(indices.begin(), indices.end(), [&](std::size_t x, std::size_t y) {
            return manifest.records[x].sample_id < manifest.records[y].sample_id;
        });
        Rng rng(derive_seed(seed, class_name));
        deterministic_shuffle(indices, rng);

        // largest-remainder rounding of class_size * ratio
        const auto n = static_cast<double>(indices.size());
        std::size_t base[3];
        double remainder[3];
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double exact = n * ratio_of[s];
            base[s] = static_cast<std::size_t>(std::floor(exact));
            remainder[s] = exact - std::floor(exact);
            assigned += base[s];
        }
        int order[3] = {0, 1, 2};
        std::sort(order, order + 3, [&](int x, int y) {
            if (remainder[x] != remainder[y]) return remainder[x] > remainder[y];
            return x < y;
        });
        for (std::size_t extra = 0; extra < indices.size() - assigned; ++extra) {
            ++base[order[extra % 3]];
        }

        std::size_t cursor = 0;
        for (int s = 0; s < 3; ++s) {
            for (std::size_t k = 0; k < base[s]; ++k, ++cursor) {
                const auto& record = manifest.records[indices[cursor]];
                assignment.by_sample[record.sample_id] = split_of[s];
                ++assignment.per_split_counts[to_string(split_of[s])][class_name];
            }
        }
    }
    return assignment;
}

void apply_split(DatasetManifest& manifest, const SplitAssignment& assignment) {
    for (auto& record : manifest.records) {
        const auto it = assignment.by_sample.find(record.sample_id);
        if (it == assignment.by_sample.end()) {
            throw std::runtime_error("no split assigned for sample " + record.sample_id);
        }
        record.split = it->second;
    }
}

std::vector<SampleRecord> records_in_split(const DatasetManifest& manifest, Split split) {
    std::vector<SampleRecord> out;
    for (const auto& record : manifest.records) {
        if (record.split == split) out.push_back(record);
    }
    return out;
}

ValidationReport validate_manifest(const DatasetManifest& manifest,
                                   const std::map<std::string, std::size_t>& expected) {
    ValidationReport report;
    if (expected.empty()) {
        report.pass = true;
        report.warnings.push_back("no expected counts given; validation is vacuous");
        return report;
    }

    std::set<std::string> names;
    for (const auto& [name, _] : expected) names.insert(name);
    for (const auto& [name, _] : manifest.class_counts) names.insert(name);

    report.pass = true;
    for (const auto& name : names) {
        ValidationEntry entry;
        entry.class_name = name;
        const auto eit = expected.find(name);
        const auto ait = manifest.class_counts.find(name);
        if (eit != expected.end()) entry.expected = eit->second;
        if (ait != manifest.class_counts.end()) entry.actual = ait->second;
        if (entry.expected && entry.actual) {
            entry.delta = static_cast<long long>(*entry.actual) -
                          static_cast<long long>(*entry.expected);
            entry.ok = entry.delta == 0;
        } else {
            entry.ok = false;
        }
        if (!entry.ok) report.pass = false;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

namespace {

json record_to_json(const SampleRecord& record, const fs::path& base_dir) {
    json j;
    j["sample_id"] = record.sample_id;
    j["path"] = record.path.lexically_relative(base_dir).generic_string();
    j["source_dataset"] = to_string(record.source_dataset);
    j["original_class"] = to_string(record.original_class);
    j["mapped_class"] = record.mapped_class ? json(to_string(*record.mapped_class)) : json(nullptr);
    j["split"] = record.split ? json(to_string(*record.split)) : json(nullptr);
    return j;
}

SampleRecord record_from_json(const json& j, const fs::path& base_dir) {
    SampleRecord record;
    record.sample_id = j.at("sample_id").get<std::string>();
    record.path = (base_dir / fs::path(j.at("path").get<std::string>())).lexically_normal();
    record.source_dataset = dataset_kind_from_string(j.at("source_dataset").get<std::string>());
    record.original_class = class_label_from_string(j.at("original_class").get<std::string>());
    if (!j.at("mapped_class").is_null()) {
        record.mapped_class = class_label_from_string(j.at("mapped_class").get<std::string>());
    }
    if (!j.at("split").is_null()) {
        record.split = split_from_string(j.at("split").get<std::string>());
    }
    return record;
}

}  // namespace

void save_manifest(const DatasetManifest& manifest, const fs::path& file) {
    const fs::path base_dir = fs::absolute(file).parent_path();
    json j;
    j["version"] = 1;
    j["created_with"] = manifest.created_with;
    j["records"] = json::array();
    for (const auto& record : manifest.records) {
        j["records"].push_back(record_to_json(record, base_dir));
    }
    j["class_counts"] = manifest.class_counts;
    j["warnings"] = manifest.warnings;

    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write manifest: " + file.string());
    out << j.dump(2) << "\n";
}

DatasetManifest load_manifest(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read manifest: " + file.string());
    json j;
    in >> j;

    const fs::path base_dir = fs::absolute(file).parent_path();
    DatasetManifest manifest;
    manifest.created_with = j.at("created_with").get<std::string>();
    for (const auto& jr : j.at("records")) {
        manifest.records.push_back(record_from_json(jr, base_dir));
    }
    manifest.class_counts = j.at("class_counts").get<std::map<std::string, std::size_t>>();
    if (j.contains("warnings")) {
        manifest.warnings = j.at("warnings").get<std::vector<std::string>>();
    }

    // the counts on disk must always agree with a recount
    auto stored = manifest.class_counts;
    manifest.recount();
    if (stored != manifest.class_counts) {
        throw std::runtime_error("manifest class_counts disagree with records: " + file.string());
    }
    return manifest;
}

}  // namespace hema
