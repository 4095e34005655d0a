#pragma once

/**
 * @file dataset.hpp
 * @brief Single-file dataset container: JSON header + fixed-width records.
 *
 * Layout: 8-byte magic, u32 format version, u32 header length, header JSON,
 * then records of identical byte size at computable offsets. Records are
 * appended strictly in index order, one flush per record, so an interrupted
 * generation resumes at the first missing index. Failed records are stored
 * with valid = 0 and a zeroed payload.
 */

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "whpa/flow.hpp"
#include "whpa/grid.hpp"

namespace whpa {

struct DatasetHeader {
    std::uint64_t config_fingerprint = 0;
    std::uint64_t master_seed = 0;
    int n_target = 0;   ///< records the dataset is meant to hold
    int n_wells = 0;    ///< lambda
    int curve_len = 0;  ///< k
    int n_endpoints = 0;  ///< b
    double curve_duration = 0.0;  ///< [d]
    SubgridSpec sub;

    std::size_t record_bytes() const;
    bool compatible_with(const DatasetHeader& other) const;
};

struct DatasetRecord {
    bool valid = true;
    std::uint64_t field_seed = 0;
    double sampled_mean = 0.0;
    double sampled_range = 0.0;
    Eigen::MatrixXd curves;       ///< lambda x k
    std::vector<Point> endpoints;  ///< b
    Eigen::MatrixXi mask;          ///< subgrid rows x cols, {0,1}
    Eigen::MatrixXd sd;            ///< subgrid rows x cols [m]

    /// Flattened predictor row for a well subset (each well's k samples
    /// concatenated in subset order).
    Eigen::VectorXd predictor_row(const std::vector<int>& well_subset) const;
    /// Flattened row-major SD image.
    Eigen::VectorXd target_row() const;
};

class DatasetFile {
public:
    /// Creates or truncates the file and writes the header.
    static DatasetFile create(const std::string& path, const DatasetHeader& header);
    /// Opens an existing dataset for reading or appending.
    static DatasetFile open(const std::string& path);

    const DatasetHeader& header() const { return header_; }
    const std::string& path() const { return path_; }

    /// Records physically present (complete) in the file.
    int n_records() const { return n_records_; }
    int n_valid() const;

    DatasetRecord read(int index) const;
    /// Appends the record at index n_records(); flushed before returning.
    void append(const DatasetRecord& rec);

    /// Bulk loaders for training: one row per requested record index.
    Eigen::MatrixXd predictor_rows(const std::vector<int>& indices,
                                   const std::vector<int>& well_subset) const;
    Eigen::MatrixXd target_rows(const std::vector<int>& indices) const;

private:
    DatasetFile() = default;

    std::string path_;
    DatasetHeader header_;
    std::uint64_t data_offset_ = 0;
    int n_records_ = 0;
};

}  // namespace whpa
