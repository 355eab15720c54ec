#pragma once

// Fixed-layout wire encoding of the federated exchange.
//
//   broadcast (48 bytes)  12 x float32 LE    global coefficients
//   update    (52 bytes)  12 x float32 LE    pseudo-gradient
//                         1  x uint32  LE    sample count n_u
//
// Values are held as double in memory and narrowed to float32 only here.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "fedctmc/client.hpp"
#include "fedctmc/types.hpp"

namespace fedctmc {

inline constexpr std::size_t kBroadcastBytes = kParamCount * 4;
inline constexpr std::size_t kUpdateBytes = kBroadcastBytes + 4;

using BroadcastBytes = std::array<std::byte, kBroadcastBytes>;
using UpdateBytes = std::array<std::byte, kUpdateBytes>;

/// Throws NumericError if a component is non-finite or overflows float32.
/// Sample counts above 2^32 - 1 saturate.
UpdateBytes encode_update(const ClientUpdate& update);

/// The user id is not on the wire; the transport supplies it.
ClientUpdate decode_update(std::span<const std::byte, kUpdateBytes> bytes,
                           std::uint64_t user_id = 0);
/// Length-checked overload; throws FormatError unless bytes.size() == 52.
ClientUpdate decode_update(std::span<const std::byte> bytes, std::uint64_t user_id = 0);
inline ClientUpdate decode_update(const UpdateBytes& bytes, std::uint64_t user_id = 0) {
  return decode_update(std::span<const std::byte, kUpdateBytes>(bytes), user_id);
}

BroadcastBytes encode_broadcast(const CoefMatrix& beta);
CoefMatrix decode_broadcast(std::span<const std::byte, kBroadcastBytes> bytes);

/// The value that survives a trip through the wire: every gradient
/// component rounded to float32, sample count saturated to 32 bits.
ClientUpdate quantize(const ClientUpdate& update);

}  // namespace fedctmc
