#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace nows {

/// One named array in a NOWS container: f64 or c128, row-major,
/// little-endian on disk.
struct ContainerEntry {
    std::string name;
    bool is_complex = false;
    std::vector<int64_t> shape;
    std::vector<double> f64;
    std::vector<std::complex<double>> c128;

    int64_t element_count() const;
    int64_t byte_len() const;

    static ContainerEntry real(std::string name, std::vector<int64_t> shape,
                               std::vector<double> data);
    static ContainerEntry complex(std::string name, std::vector<int64_t> shape,
                                  std::vector<std::complex<double>> data);
};

/// File layout: magic "NOWS1\n" | u32 LE header_len | header JSON | payload.
/// The header lists entries with byte offsets relative to the payload start;
/// entries are contiguous and non-overlapping in offset order. One format
/// serves datasets and model checkpoints.
struct NowsContainer {
    std::vector<ContainerEntry> entries;
    /// Arbitrary JSON object; keys are kept sorted so rewrites are
    /// byte-identical.
    std::string metadata_json = "{}";

    const ContainerEntry& entry(const std::string& name) const;
    bool has(const std::string& name) const;

    nlohmann::json metadata() const;
    void set_metadata(const nlohmann::json& m);
};

void container_write(const NowsContainer& c, const std::string& path);
NowsContainer container_read(const std::string& path);

}  // namespace nows
