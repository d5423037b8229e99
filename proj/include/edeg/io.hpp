#pragma once

#include "edeg/estimator.hpp"
#include "edeg/net.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace edeg::io {

/// Writes via a temporary sibling file and rename, so readers never see a
/// partial artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// CSV with a header: feature columns x0..x{d-1}, optional integer `label`,
/// optional regression targets y0..y{o-1}.
Dataset read_dataset_csv(const std::filesystem::path& path);
std::string dataset_to_csv(const Dataset& data);

/// Shortest round-trip text for a double ("%.17g").
std::string format_double(double v);
/// C99 hex-float text; parses back bit-exactly.
std::string hex_double(double v);
double parse_hex_double(const std::string& s);

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    FeedForwardNet net;
    nlohmann::json config;
};

nlohmann::json checkpoint_to_json(const FeedForwardNet& net, const nlohmann::json& config);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);
void save_checkpoint(const std::filesystem::path& path, const FeedForwardNet& net, const nlohmann::json& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Quotes a CSV field when RFC 4180 requires it.
std::string csv_field(const std::string& s);

} // namespace edeg::io
