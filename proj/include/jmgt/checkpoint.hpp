// JMGT1 binary checkpoints (little-endian).
//
// Layout: magic "JMGT1\0", u32 version, u32 dim, u32 points, f64 box_length[dim],
// params block, f64 t, psi/v/w coefficients as interleaved (re, im) f64,
// u32 ring length, ring snapshots, then the resume block (history dt, capacity,
// steps, t_elapsed, psi_init, step_count, closed-memory flag and data).
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jmgt/core.hpp"

namespace jmgt {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Checkpoint {
    StateVector state;
    PhysicalParams params;
};

std::vector<std::uint8_t> encode_checkpoint(const StateVector& s, const PhysicalParams& p);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::string& path, const StateVector& s, const PhysicalParams& p);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace jmgt
