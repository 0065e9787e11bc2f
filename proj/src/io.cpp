#include "ifl/io.hpp"

#include "ifl/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ifl::io {

std::string to_string(Scaling s) {
  switch (s) {
    case Scaling::None: return "none";
    case Scaling::DivideByMax: return "divide-by-max";
    case Scaling::DivideByTwo: return "divide-by-two";
  }
  return "none";
}

Scaling scaling_from_string(const std::string& name) {
  for (auto s : {Scaling::None, Scaling::DivideByMax, Scaling::DivideByTwo}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown scaling rule '" + name + "'");
}

void apply_scaling(Matrix& x, Scaling rule) {
  switch (rule) {
    case Scaling::None: break;
    case Scaling::DivideByMax: {
      const double peak = x.size() > 0 ? x.cwiseAbs().maxCoeff() : 0.0;
      if (peak > 0.0) x /= peak;
      break;
    }
    case Scaling::DivideByTwo: x /= 2.0; break;
  }
}

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t begin = 0;
  while (true) {
    const auto comma = line.find(',', begin);
    cells.push_back(trim(line.substr(begin, comma == std::string_view::npos ? std::string_view::npos : comma - begin)));
    if (comma == std::string_view::npos) break;
    begin = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || end != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return value;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

RawTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  RawTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    std::vector<double> values;
    values.reserve(cells.size());
    std::optional<std::size_t> bad;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_number(cells[c]);
      if (!v) {
        if (!bad) bad = c;
        continue;
      }
      values.push_back(*v);
    }
    if (first) {
      first = false;
      width = cells.size();
      if (bad) {
        for (auto c : cells) table.header.emplace_back(c);
        continue;
      }
    }
    if (cells.size() != width) {
      throw DataError(where(path, line_no) + ": expected " + std::to_string(width) + " fields, found " +
                      std::to_string(cells.size()));
    }
    if (bad) {
      throw DataError(where(path, line_no) + ": field " + std::to_string(*bad + 1) + " ('" +
                      std::string(cells[*bad]) + "') is not numeric");
    }
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
      throw DataError(where(path, line_no) + ": non-finite value");
    }
    table.rows.push_back(std::move(values));
  }
  if (width == 0) throw DataError(path.string() + ": file is empty");
  return table;
}

std::size_t resolve_label_column(const std::filesystem::path& path, const RawTable& table, std::size_t width,
                                 const std::string& spec) {
  const auto it = std::find(table.header.begin(), table.header.end(), spec);
  if (it != table.header.end()) return static_cast<std::size_t>(it - table.header.begin());
  long long index = 0;
  const auto [end, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), index);
  if (ec != std::errc() || end != spec.data() + spec.size()) {
    throw DataError(path.string() + ": no label column named '" + spec + "'");
  }
  if (index < 0) index += static_cast<long long>(width);
  if (index < 0 || index >= static_cast<long long>(width)) {
    throw DataError(path.string() + ": label column index " + spec + " is out of range");
  }
  return static_cast<std::size_t>(index);
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  const RawTable table = read_table(path);
  const std::size_t width = table.header.empty() ? (table.rows.empty() ? 0 : table.rows.front().size()) : table.header.size();
  std::optional<std::size_t> label_col;
  if (opts.label_column) label_col = resolve_label_column(path, table, width, *opts.label_column);

  Dataset data;
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto d = static_cast<Eigen::Index>(width - (label_col ? 1 : 0));
  data.x.resize(n, d);
  std::vector<long long> raw_labels;
  const std::size_t data_line0 = table.header.empty() ? 1 : 2;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    Eigen::Index out = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (label_col && c == *label_col) {
        if (row[c] != std::floor(row[c])) {
          throw DataError(where(path, data_line0 + static_cast<std::size_t>(i)) + ": label " + std::to_string(row[c]) +
                          " is not an integer");
        }
        raw_labels.push_back(static_cast<long long>(row[c]));
      } else {
        data.x(i, out++) = row[c];
      }
    }
  }
  if (label_col) {
    std::vector<long long> values = raw_labels;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    data.labels.emplace();
    for (auto v : raw_labels) {
      data.labels->push_back(static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin()));
    }
    data.label_values = std::move(values);
  }
  apply_scaling(data.x, opts.scaling);
  return data;
}

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t big_endian_u32(const std::vector<unsigned char>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

// Validates the header and returns the dimension sizes.
std::vector<std::size_t> idx_header(const std::filesystem::path& path, const std::vector<unsigned char>& bytes,
                                    std::uint32_t expected_magic) {
  if (bytes.size() < 4) throw DataError(path.string() + ": truncated IDX header at byte 0");
  const auto magic = big_endian_u32(bytes, 0);
  if (magic != expected_magic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ": bad magic 0x%08x (expected 0x%08x)", magic, expected_magic);
    throw DataError(path.string() + buf);
  }
  const std::size_t ndims = magic & 0xFF;
  if (bytes.size() < 4 + 4 * ndims) throw DataError(path.string() + ": truncated IDX header at byte 4");
  std::vector<std::size_t> dims;
  std::size_t total = 1;
  for (std::size_t k = 0; k < ndims; ++k) {
    dims.push_back(big_endian_u32(bytes, 4 + 4 * k));
    total *= dims.back();
  }
  const std::size_t payload = 4 + 4 * ndims;
  if (bytes.size() < payload + total) {
    throw DataError(path.string() + ": truncated payload, expected " + std::to_string(payload + total) +
                    " bytes, file has " + std::to_string(bytes.size()));
  }
  return dims;
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, Scaling scaling) {
  const auto image_bytes = read_bytes(images);
  const auto label_bytes = read_bytes(labels);
  const auto image_dims = idx_header(images, image_bytes, 0x00000803);
  const auto label_dims = idx_header(labels, label_bytes, 0x00000801);
  if (image_dims[0] != label_dims[0]) {
    throw DataError(images.string() + ": " + std::to_string(image_dims[0]) + " images but " + labels.string() +
                    " holds " + std::to_string(label_dims[0]) + " labels");
  }
  const std::size_t n = image_dims[0];
  const std::size_t d = image_dims[1] * image_dims[2];
  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const std::size_t image_offset = 16;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = image_bytes[image_offset + i * d + j];
    }
  }
  std::vector<long long> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = label_bytes[8 + i];
  std::vector<long long> values = raw;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  data.labels.emplace();
  for (auto v : raw) {
    data.labels->push_back(static_cast<std::size_t>(std::lower_bound(values.begin(), values.end(), v) - values.begin()));
  }
  data.label_values = std::move(values);
  apply_scaling(data.x, scaling);
  return data;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace

void export_features(const core::IflFeatureTable& table, const std::filesystem::path& path) {
  table.validate();
  auto out = open_for_write(path);
  out << "instance_id";
  if (table.has_versions()) out << ",version_id";
  for (const auto& c : table.columns) out << ',' << c;
  if (table.labels) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out << table.instance_id[i];
    if (table.has_versions()) out << ',' << table.version_id[i];
    for (Eigen::Index c = 0; c < table.features.cols(); ++c) out << ',' << format_double(table.features(static_cast<Eigen::Index>(i), c));
    if (table.labels) out << ',' << (*table.labels)[i];
    out << '\n';
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

core::IflFeatureTable load_features(const std::filesystem::path& path) {
  const RawTable raw = read_table(path);
  if (raw.header.empty() || raw.header.front() != "instance_id") {
    throw DataError(path.string() + ": missing instance_id header");
  }
  std::vector<std::string> cols(raw.header.begin() + 1, raw.header.end());
  const bool versions = !cols.empty() && cols.front() == "version_id";
  if (versions) cols.erase(cols.begin());
  const bool labels = !cols.empty() && cols.back() == "label";
  if (labels) cols.pop_back();

  const auto weights = static_cast<std::size_t>(std::count_if(cols.begin(), cols.end(), [](const std::string& c) {
    return c.rfind("weight_", 0) == 0;
  }));
  const bool accuracy = std::find(cols.begin(), cols.end(), "accuracy") != cols.end();
  core::IflFeatureTable table;
  if (versions) {
    table.mode = core::FeatureMode::Technique1;
  } else if (!accuracy) {
    table.mode = core::FeatureMode::Clustering;
  } else if (cols.size() > 1 && cols[1] == "accuracy") {
    table.mode = core::FeatureMode::Technique2;
  } else {
    table.mode = core::FeatureMode::ClassificationRaw;
  }
  // Technique-1 tables carry one weight column; s is recovered from the version ids.
  table.s = weights;
  table.columns = cols;

  const std::size_t offset = versions ? 2 : 1;
  table.features.resize(static_cast<Eigen::Index>(raw.rows.size()), static_cast<Eigen::Index>(cols.size()));
  if (labels) table.labels.emplace();
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const auto& row = raw.rows[i];
    table.instance_id.push_back(static_cast<std::size_t>(row[0]));
    if (versions) table.version_id.push_back(static_cast<std::size_t>(row[1]));
    for (std::size_t c = 0; c < cols.size(); ++c) table.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[offset + c];
    if (labels) table.labels->push_back(static_cast<std::size_t>(row.back()));
  }
  if (versions) {
    table.s = table.version_id.empty() ? 0 : *std::max_element(table.version_id.begin(), table.version_id.end()) + 1;
  }
  try {
    table.validate();
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return table;
}

void export_matrix(const Matrix& x, const std::vector<std::string>& header, const std::filesystem::path& path) {
  if (static_cast<Eigen::Index>(header.size()) != x.cols()) throw ShapeError("export_matrix: header width != columns");
  auto out = open_for_write(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) out << (c ? "," : "") << format_double(x(i, c));
    out << '\n';
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace ifl::io
