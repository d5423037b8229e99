#include "edeg/io.hpp"

#include "edeg/error.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string_view>

namespace edeg::io {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hex_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ConfigError("malformed number '" + s + "'");
    return v;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

namespace {

// RFC 4180 fields of one record. Quoted fields may contain commas and
// doubled quotes; surrounding blanks outside quotes are dropped.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c != '"') {
                field += c;
            } else if (i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else {
                quoted = false;
            }
        } else if (c == '"') {
            if (was_quoted || field.find_first_not_of(' ') != std::string::npos) {
                throw ParseError("unexpected quote", line_no, i + 1);
            }
            field.clear();
            quoted = was_quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else if (was_quoted && c != ' ') {
            throw ParseError("text after closing quote", line_no, i + 1);
        } else {
            field += c;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line_no, line.size() + 1);
    out.push_back(std::move(field));
    for (auto& f : out) {
        while (!f.empty() && f.back() == ' ') f.pop_back();
        while (!f.empty() && f.front() == ' ') f.erase(f.begin());
    }
    return out;
}

double parse_number(const std::string& s, std::size_t line, std::size_t column) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw ParseError("invalid number '" + s + "'", line, column);
    return v;
}

} // namespace

Dataset read_dataset_csv(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty dataset file", 1, 1);
    const auto header = split_csv_line(line, 1);

    std::vector<int> x_cols;
    std::vector<int> y_cols;
    int label_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& h = header[c];
        if (h == "label") {
            label_col = static_cast<int>(c);
        } else if (h.size() > 1 && (h[0] == 'x' || h[0] == 'y') &&
                   h.find_first_not_of("0123456789", 1) == std::string::npos) {
            const auto idx = static_cast<std::size_t>(std::stoul(h.substr(1)));
            auto& cols = h[0] == 'x' ? x_cols : y_cols;
            if (idx != cols.size()) throw ParseError("column " + h + " out of order", 1, c + 1);
            cols.push_back(static_cast<int>(c));
        } else {
            throw ParseError("unknown column '" + h + "'", 1, c + 1);
        }
    }
    if (x_cols.empty()) throw ParseError("dataset has no feature columns", 1, 1);

    std::vector<std::vector<double>> xs;
    std::vector<std::vector<double>> ys;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line, line_no);
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()), line_no, 1);
        }
        std::vector<double> x;
        for (int c : x_cols) x.push_back(parse_number(fields[static_cast<std::size_t>(c)], line_no, static_cast<std::size_t>(c) + 1));
        xs.push_back(std::move(x));
        std::vector<double> y;
        for (int c : y_cols) y.push_back(parse_number(fields[static_cast<std::size_t>(c)], line_no, static_cast<std::size_t>(c) + 1));
        ys.push_back(std::move(y));
        if (label_col >= 0) {
            const std::string& f = fields[static_cast<std::size_t>(label_col)];
            if (f.empty() || f.find_first_not_of("0123456789") != std::string::npos) {
                throw ParseError("label must be a nonnegative integer", line_no, static_cast<std::size_t>(label_col) + 1);
            }
            labels.push_back(std::stoi(f));
        }
    }

    Dataset data;
    data.inputs.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(x_cols.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < x_cols.size(); ++j) data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = xs[i][j];
    }
    if (!y_cols.empty()) {
        data.targets.resize(static_cast<Eigen::Index>(ys.size()), static_cast<Eigen::Index>(y_cols.size()));
        for (std::size_t i = 0; i < ys.size(); ++i) {
            for (std::size_t j = 0; j < y_cols.size(); ++j) data.targets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ys[i][j];
        }
    }
    data.labels = std::move(labels);
    return data;
}

std::string dataset_to_csv(const Dataset& data) {
    std::ostringstream os;
    for (Eigen::Index j = 0; j < data.inputs.cols(); ++j) os << (j ? "," : "") << "x" << j;
    if (data.labeled()) os << ",label";
    for (Eigen::Index j = 0; j < data.targets.cols(); ++j) os << ",y" << j;
    os << "\r\n";
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.inputs.cols(); ++j) os << (j ? "," : "") << format_double(data.inputs(i, j));
        if (data.labeled()) os << "," << data.labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < data.targets.cols(); ++j) os << "," << format_double(data.targets(i, j));
        os << "\r\n";
    }
    return os.str();
}

nlohmann::json checkpoint_to_json(const FeedForwardNet& net, const nlohmann::json& config) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : net.layers()) {
        nlohmann::json w = nlohmann::json::array();
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) w.push_back(hex_double(layer.weight(i, j)));
        }
        nlohmann::json b = nlohmann::json::array();
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) b.push_back(hex_double(layer.bias[i]));
        layers.push_back({{"inputs", layer.weight.cols()},
                          {"outputs", layer.weight.rows()},
                          {"activation", std::string(to_string(layer.activation))},
                          {"weight", std::move(w)},
                          {"bias", std::move(b)}});
    }
    return {{"format", "edeg-checkpoint"},
            {"version", kCheckpointVersion},
            {"library_version", EDEG_VERSION},
            {"layers", std::move(layers)},
            {"config", config}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format") != "edeg-checkpoint") throw ConfigError("not an edeg checkpoint");
        if (doc.at("version").get<int>() != kCheckpointVersion) {
            throw ConfigError("unsupported checkpoint version " + doc.at("version").dump());
        }
        std::vector<DenseLayer> layers;
        for (const auto& l : doc.at("layers")) {
            const auto in = l.at("inputs").get<Eigen::Index>();
            const auto out = l.at("outputs").get<Eigen::Index>();
            DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out),
                             activation_from_string(l.at("activation").get<std::string>())};
            const auto& w = l.at("weight");
            const auto& b = l.at("bias");
            if (static_cast<Eigen::Index>(w.size()) != in * out || static_cast<Eigen::Index>(b.size()) != out) {
                throw ConfigError("checkpoint layer has wrong parameter count");
            }
            std::size_t k = 0;
            for (Eigen::Index i = 0; i < out; ++i) {
                for (Eigen::Index j = 0; j < in; ++j) layer.weight(i, j) = parse_hex_double(w[k++].get<std::string>());
            }
            for (Eigen::Index i = 0; i < out; ++i) layer.bias[i] = parse_hex_double(b[static_cast<std::size_t>(i)].get<std::string>());
            layers.push_back(std::move(layer));
        }
        return {FeedForwardNet(std::move(layers)), doc.value("config", nlohmann::json::object())};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const fs::path& path, const FeedForwardNet& net, const nlohmann::json& config) {
    write_file_atomic(path, checkpoint_to_json(net, config).dump(1) + "\n");
}

Checkpoint load_checkpoint(const fs::path& path) {
    const std::string text = read_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
    }
    return checkpoint_from_json(doc);
}

} // namespace edeg::io
