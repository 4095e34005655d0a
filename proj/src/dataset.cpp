#include "whpa/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "whpa/binio.hpp"
#include "whpa/hash.hpp"

namespace whpa {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'W', 'H', 'P', 'A', 'D', 'S', '0', '1'};
constexpr std::uint32_t kVersion = 1;

void append_raw(std::vector<char>& buf, const void* data, std::size_t len) {
    const char* p = static_cast<const char*>(data);
    buf.insert(buf.end(), p, p + len);
}

template <typename T>
void append_pod(std::vector<char>& buf, const T& v) {
    append_raw(buf, &v, sizeof v);
}

template <typename T>
T read_pod(const char*& p) {
    T v;
    std::memcpy(&v, p, sizeof v);
    p += sizeof v;
    return v;
}

json header_json(const DatasetHeader& h) {
    return {{"config_fingerprint", hex64(h.config_fingerprint)},
            {"master_seed", h.master_seed},
            {"n_target", h.n_target},
            {"n_wells", h.n_wells},
            {"curve_len", h.curve_len},
            {"n_endpoints", h.n_endpoints},
            {"curve_duration", h.curve_duration},
            {"subgrid",
             {{"x_min", h.sub.x_min},
              {"x_max", h.sub.x_max},
              {"y_min", h.sub.y_min},
              {"y_max", h.sub.y_max},
              {"cell", h.sub.cell}}}};
}

DatasetHeader header_from_json(const json& j) {
    DatasetHeader h;
    const std::string fp = j.at("config_fingerprint").get<std::string>();
    h.config_fingerprint = std::stoull(fp, nullptr, 16);
    h.master_seed = j.at("master_seed").get<std::uint64_t>();
    h.n_target = j.at("n_target").get<int>();
    h.n_wells = j.at("n_wells").get<int>();
    h.curve_len = j.at("curve_len").get<int>();
    h.n_endpoints = j.at("n_endpoints").get<int>();
    h.curve_duration = j.at("curve_duration").get<double>();
    const json& s = j.at("subgrid");
    h.sub.x_min = s.at("x_min").get<double>();
    h.sub.x_max = s.at("x_max").get<double>();
    h.sub.y_min = s.at("y_min").get<double>();
    h.sub.y_max = s.at("y_max").get<double>();
    h.sub.cell = s.at("cell").get<double>();
    return h;
}

}  // namespace

std::size_t DatasetHeader::record_bytes() const {
    const std::size_t cells = static_cast<std::size_t>(sub.n_rows()) * sub.n_cols();
    return 1                                               // valid flag
           + 8 + 8 + 8                                     // field_seed, mean, range
           + static_cast<std::size_t>(n_wells) * curve_len * 8  // curves
           + static_cast<std::size_t>(n_endpoints) * 16         // endpoints
           + cells                                              // binary mask
           + cells * 8;                                         // SD image
}

bool DatasetHeader::compatible_with(const DatasetHeader& other) const {
    return config_fingerprint == other.config_fingerprint &&
           master_seed == other.master_seed && n_target == other.n_target &&
           n_wells == other.n_wells && curve_len == other.curve_len &&
           n_endpoints == other.n_endpoints && curve_duration == other.curve_duration &&
           sub == other.sub;
}

Eigen::VectorXd DatasetRecord::predictor_row(const std::vector<int>& well_subset) const {
    const Eigen::Index k = curves.cols();
    Eigen::VectorXd row(static_cast<Eigen::Index>(well_subset.size()) * k);
    for (size_t s = 0; s < well_subset.size(); ++s) {
        const int w = well_subset[s];
        if (w < 0 || w >= curves.rows())
            throw std::invalid_argument("predictor_row: well index out of range");
        row.segment(static_cast<Eigen::Index>(s) * k, k) = curves.row(w);
    }
    return row;
}

Eigen::VectorXd DatasetRecord::target_row() const {
    const int nr = static_cast<int>(sd.rows());
    const int nc = static_cast<int>(sd.cols());
    Eigen::VectorXd row(static_cast<Eigen::Index>(nr) * nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) row[static_cast<Eigen::Index>(i) * nc + j] = sd(i, j);
    return row;
}

DatasetFile DatasetFile::create(const std::string& path, const DatasetHeader& header) {
    const std::string text = header_json(header).dump();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot create dataset: " + path);
    out.write(kMagic, sizeof kMagic);
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), 4);
    const std::uint32_t len = static_cast<std::uint32_t>(text.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw std::runtime_error("dataset header write failed: " + path);
    out.close();

    DatasetFile f;
    f.path_ = path;
    f.header_ = header;
    f.data_offset_ = 16 + text.size();
    f.n_records_ = 0;
    return f;
}

DatasetFile DatasetFile::open(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    char magic[8];
    in.read(magic, 8);
    if (in.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a dataset file: " + path);
    std::uint32_t version = 0, len = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&len), 4);
    if (!in || version != kVersion)
        throw std::runtime_error("unsupported dataset version in " + path);
    std::string text(len, '\0');
    in.read(text.data(), len);
    if (!in) throw std::runtime_error("truncated dataset header: " + path);

    DatasetFile f;
    f.path_ = path;
    try {
        f.header_ = header_from_json(json::parse(text));
    } catch (const std::exception& e) {
        throw std::runtime_error("bad dataset header in " + path + ": " + e.what());
    }
    f.data_offset_ = 16 + static_cast<std::uint64_t>(len);

    in.seekg(0, std::ios::end);
    const std::uint64_t size = static_cast<std::uint64_t>(in.tellg());
    const std::size_t rec = f.header_.record_bytes();
    f.n_records_ = static_cast<int>((size - f.data_offset_) / rec);
    f.n_records_ = std::min(f.n_records_, f.header_.n_target);
    return f;
}

int DatasetFile::n_valid() const {
    int count = 0;
    for (int i = 0; i < n_records_; ++i)
        if (read(i).valid) ++count;
    return count;
}

DatasetRecord DatasetFile::read(int index) const {
    if (index < 0 || index >= n_records_)
        throw std::out_of_range("dataset record index out of range");
    const std::size_t rec = header_.record_bytes();
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset: " + path_);
    in.seekg(static_cast<std::streamoff>(data_offset_ + rec * static_cast<std::size_t>(index)));
    std::vector<char> buf(rec);
    in.read(buf.data(), static_cast<std::streamsize>(rec));
    if (in.gcount() != static_cast<std::streamsize>(rec))
        throw std::runtime_error("truncated dataset record in " + path_);

    const char* p = buf.data();
    DatasetRecord r;
    r.valid = read_pod<std::uint8_t>(p) != 0;
    r.field_seed = read_pod<std::uint64_t>(p);
    r.sampled_mean = read_pod<double>(p);
    r.sampled_range = read_pod<double>(p);
    r.curves.resize(header_.n_wells, header_.curve_len);
    for (int w = 0; w < header_.n_wells; ++w)
        for (int t = 0; t < header_.curve_len; ++t) r.curves(w, t) = read_pod<double>(p);
    r.endpoints.resize(static_cast<size_t>(header_.n_endpoints));
    for (Point& pt : r.endpoints) {
        pt.x = read_pod<double>(p);
        pt.y = read_pod<double>(p);
    }
    const int nr = header_.sub.n_rows();
    const int nc = header_.sub.n_cols();
    r.mask.resize(nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) r.mask(i, j) = read_pod<std::uint8_t>(p);
    r.sd.resize(nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) r.sd(i, j) = read_pod<double>(p);
    return r;
}

void DatasetFile::append(const DatasetRecord& rec) {
    if (n_records_ >= header_.n_target)
        throw std::runtime_error("dataset already holds n_target records");
    const int nr = header_.sub.n_rows();
    const int nc = header_.sub.n_cols();
    if (rec.curves.rows() != header_.n_wells || rec.curves.cols() != header_.curve_len ||
        static_cast<int>(rec.endpoints.size()) != header_.n_endpoints ||
        rec.mask.rows() != nr || rec.mask.cols() != nc || rec.sd.rows() != nr ||
        rec.sd.cols() != nc)
        throw std::invalid_argument("dataset append: record shape mismatch");

    std::vector<char> buf;
    buf.reserve(header_.record_bytes());
    append_pod<std::uint8_t>(buf, rec.valid ? 1 : 0);
    append_pod(buf, rec.field_seed);
    append_pod(buf, rec.sampled_mean);
    append_pod(buf, rec.sampled_range);
    for (int w = 0; w < header_.n_wells; ++w)
        for (int t = 0; t < header_.curve_len; ++t) append_pod(buf, rec.curves(w, t));
    for (const Point& pt : rec.endpoints) {
        append_pod(buf, pt.x);
        append_pod(buf, pt.y);
    }
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j)
            append_pod<std::uint8_t>(buf, rec.mask(i, j) ? 1 : 0);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) append_pod(buf, rec.sd(i, j));
    if (buf.size() != header_.record_bytes())
        throw std::logic_error("dataset append: encoded size mismatch");

    std::ofstream out(path_, std::ios::binary | std::ios::in | std::ios::out);
    if (!out) throw std::runtime_error("cannot open dataset for append: " + path_);
    out.seekp(static_cast<std::streamoff>(data_offset_ +
                                          header_.record_bytes() *
                                              static_cast<std::size_t>(n_records_)));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw std::runtime_error("dataset append failed: " + path_);
    ++n_records_;
}

Eigen::MatrixXd DatasetFile::predictor_rows(const std::vector<int>& indices,
                                            const std::vector<int>& well_subset) const {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(indices.size()),
                         static_cast<Eigen::Index>(well_subset.size()) * header_.curve_len);
    for (size_t i = 0; i < indices.size(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) = read(indices[i]).predictor_row(well_subset);
    return rows;
}

Eigen::MatrixXd DatasetFile::target_rows(const std::vector<int>& indices) const {
    const Eigen::Index width =
        static_cast<Eigen::Index>(header_.sub.n_rows()) * header_.sub.n_cols();
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(indices.size()), width);
    for (size_t i = 0; i < indices.size(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) = read(indices[i]).target_row();
    return rows;
}

}  // namespace whpa
