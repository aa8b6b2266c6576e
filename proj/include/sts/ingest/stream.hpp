#pragma once

#include <fstream>
#include <optional>
#include <string>

#include "sts/ingest/types.hpp"

namespace sts::ingest {

// PBM (P4) packed binary bitmap, MSB-first rows padded to whole bytes.
void write_pbm(const std::string& path, const SilhouetteFrame& frame);
SilhouetteFrame read_pbm(const std::string& path);

// Lazily consumed silhouette stream: a directory with manifest.jsonl (one
// JSON object per frame: t, file, w, h) and per-frame PBM files. Constant
// memory in stream length; single-consumer.
class SilhouetteStreamReader {
public:
    explicit SilhouetteStreamReader(const std::string& dir);

    // Next frame in timestamp order, or nullopt at end of stream.
    std::optional<SilhouetteFrame> next();

    const std::string& directory() const { return dir_; }

private:
    std::string dir_;
    std::ifstream manifest_;
    int index_ = 0;
    double last_timestamp_ = 0.0;
};

// Writer emitting the same format; used by the synthetic generator.
class SilhouetteStreamWriter {
public:
    explicit SilhouetteStreamWriter(const std::string& dir);
    ~SilhouetteStreamWriter();

    void append(const SilhouetteFrame& frame);
    void close();

private:
    std::string dir_;
    std::ofstream manifest_;
    int index_ = 0;
};

}  // namespace sts::ingest
