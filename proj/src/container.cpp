#include "nows/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nows {

namespace {

constexpr char kMagic[6] = {'N', 'O', 'W', 'S', '1', '\n'};

void put_u64_le(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t get_u64_le(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

void put_f64_le(std::string& out, double d) {
    put_u64_le(out, std::bit_cast<uint64_t>(d));
}

double get_f64_le(const unsigned char* p) {
    return std::bit_cast<double>(get_u64_le(p));
}

[[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("NowsContainer: " + what);
}

}  // namespace

int64_t ContainerEntry::element_count() const {
    int64_t n = 1;
    for (int64_t s : shape) n *= s;
    return n;
}

int64_t ContainerEntry::byte_len() const {
    return element_count() * (is_complex ? 16 : 8);
}

ContainerEntry ContainerEntry::real(std::string name, std::vector<int64_t> shape,
                                    std::vector<double> data) {
    ContainerEntry e;
    e.name = std::move(name);
    e.shape = std::move(shape);
    e.f64 = std::move(data);
    if (e.element_count() != static_cast<int64_t>(e.f64.size()))
        fail("entry '" + e.name + "': shape/data mismatch");
    return e;
}

ContainerEntry ContainerEntry::complex(std::string name, std::vector<int64_t> shape,
                                       std::vector<std::complex<double>> data) {
    ContainerEntry e;
    e.name = std::move(name);
    e.is_complex = true;
    e.shape = std::move(shape);
    e.c128 = std::move(data);
    if (e.element_count() != static_cast<int64_t>(e.c128.size()))
        fail("entry '" + e.name + "': shape/data mismatch");
    return e;
}

const ContainerEntry& NowsContainer::entry(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    fail("missing entry '" + name + "'");
}

bool NowsContainer::has(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return true;
    return false;
}

nlohmann::json NowsContainer::metadata() const {
    return nlohmann::json::parse(metadata_json);
}

void NowsContainer::set_metadata(const nlohmann::json& m) {
    metadata_json = m.dump();
}

void container_write(const NowsContainer& c, const std::string& path) {
    nlohmann::json header;
    header["version"] = 1;
    nlohmann::json ents = nlohmann::json::array();
    int64_t offset = 0;
    for (const auto& e : c.entries) {
        nlohmann::json je;
        je["name"] = e.name;
        je["dtype"] = e.is_complex ? "c128" : "f64";
        je["shape"] = e.shape;
        je["byte_offset"] = offset;
        je["byte_len"] = e.byte_len();
        offset += e.byte_len();
        ents.push_back(std::move(je));
    }
    header["entries"] = std::move(ents);
    header["metadata"] = nlohmann::json::parse(c.metadata_json);
    std::string htext = header.dump();

    std::string payload;
    payload.reserve(static_cast<size_t>(offset));
    for (const auto& e : c.entries) {
        if (e.is_complex)
            for (const auto& z : e.c128) {
                put_f64_le(payload, z.real());
                put_f64_le(payload, z.imag());
            }
        else
            for (double d : e.f64) put_f64_le(payload, d);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open '" + path + "' for writing");
    out.write(kMagic, sizeof(kMagic));
    uint32_t hlen = static_cast<uint32_t>(htext.size());
    char lenbuf[4];
    for (int i = 0; i < 4; ++i) lenbuf[i] = static_cast<char>((hlen >> (8 * i)) & 0xff);
    out.write(lenbuf, 4);
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) fail("write failed for '" + path + "'");
}

NowsContainer container_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() < sizeof(kMagic) + 4) fail("file too short");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        fail("bad magic");
    uint32_t hlen = 0;
    for (int i = 0; i < 4; ++i)
        hlen |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[6 + i])) << (8 * i);
    size_t payload_start = sizeof(kMagic) + 4 + hlen;
    if (payload_start > bytes.size()) fail("truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.substr(10, hlen));
    } catch (const std::exception& e) {
        fail(std::string("invalid header JSON: ") + e.what());
    }
    if (!header.contains("version") || header["version"].get<int>() != 1)
        fail("unsupported version");

    NowsContainer c;
    c.metadata_json = header.value("metadata", nlohmann::json::object()).dump();
    const size_t payload_len = bytes.size() - payload_start;
    int64_t expect_offset = 0;
    for (const auto& je : header.at("entries")) {
        ContainerEntry e;
        e.name = je.at("name").get<std::string>();
        std::string dtype = je.at("dtype").get<std::string>();
        if (dtype == "c128")
            e.is_complex = true;
        else if (dtype != "f64")
            fail("entry '" + e.name + "': unknown dtype '" + dtype + "'");
        e.shape = je.at("shape").get<std::vector<int64_t>>();
        for (int64_t s : e.shape)
            if (s < 0) fail("entry '" + e.name + "': negative shape");
        int64_t off = je.at("byte_offset").get<int64_t>();
        int64_t len = je.at("byte_len").get<int64_t>();
        if (len != e.byte_len())
            fail("entry '" + e.name + "': byte_len does not match shape");
        if (off != expect_offset)
            fail("entry '" + e.name + "': entries must be contiguous and non-overlapping");
        expect_offset = off + len;
        if (off + len > static_cast<int64_t>(payload_len))
            fail("entry '" + e.name + "': truncated payload");

        const unsigned char* p =
            reinterpret_cast<const unsigned char*>(bytes.data()) + payload_start + off;
        int64_t count = e.element_count();
        if (e.is_complex) {
            e.c128.resize(static_cast<size_t>(count));
            for (int64_t i = 0; i < count; ++i)
                e.c128[static_cast<size_t>(i)] = {get_f64_le(p + 16 * i),
                                                  get_f64_le(p + 16 * i + 8)};
        } else {
            e.f64.resize(static_cast<size_t>(count));
            for (int64_t i = 0; i < count; ++i)
                e.f64[static_cast<size_t>(i)] = get_f64_le(p + 8 * i);
        }
        c.entries.push_back(std::move(e));
    }
    if (expect_offset != static_cast<int64_t>(payload_len))
        fail("payload length does not match entries");
    return c;
}

}  // namespace nows
