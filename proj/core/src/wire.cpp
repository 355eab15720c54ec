#include "fedctmc/wire.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace fedctmc {

namespace {

void put_u32(std::uint32_t v, std::byte* out) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::byte>((v >> (8 * i)) & 0xFFU);
}

std::uint32_t get_u32(const std::byte* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::to_integer<std::uint32_t>(in[i]) << (8 * i);
  return v;
}

float narrow(double value, std::size_t index) {
  const auto f = static_cast<float>(value);
  if (!std::isfinite(value) || !std::isfinite(f)) {
    throw NumericError("component " + std::to_string(index) +
                       " is not representable as a finite float32");
  }
  return f;
}

void put_vector(const Vec12& v, std::byte* out) {
  for (std::size_t i = 0; i < v.size(); ++i) put_u32(std::bit_cast<std::uint32_t>(narrow(v[i], i)), out + 4 * i);
}

Vec12 get_vector(const std::byte* in) {
  Vec12 v{};
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::bit_cast<float>(get_u32(in + 4 * i));
  return v;
}

std::uint32_t saturate(std::uint64_t n) {
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(n, std::numeric_limits<std::uint32_t>::max()));
}

}  // namespace

UpdateBytes encode_update(const ClientUpdate& update) {
  UpdateBytes bytes{};
  put_vector(update.pseudo_gradient, bytes.data());
  put_u32(saturate(update.sample_count), bytes.data() + kBroadcastBytes);
  return bytes;
}

ClientUpdate decode_update(std::span<const std::byte, kUpdateBytes> bytes, std::uint64_t user_id) {
  ClientUpdate u;
  u.pseudo_gradient = get_vector(bytes.data());
  u.sample_count = get_u32(bytes.data() + kBroadcastBytes);
  u.user_id = user_id;
  return u;
}

ClientUpdate decode_update(std::span<const std::byte> bytes, std::uint64_t user_id) {
  if (bytes.size() != kUpdateBytes) {
    throw FormatError("client update must be " + std::to_string(kUpdateBytes) + " bytes, got " +
                      std::to_string(bytes.size()));
  }
  return decode_update(bytes.first<kUpdateBytes>(), user_id);
}

BroadcastBytes encode_broadcast(const CoefMatrix& beta) {
  BroadcastBytes bytes{};
  put_vector(beta.flat(), bytes.data());
  return bytes;
}

CoefMatrix decode_broadcast(std::span<const std::byte, kBroadcastBytes> bytes) {
  return CoefMatrix(get_vector(bytes.data()));
}

ClientUpdate quantize(const ClientUpdate& update) {
  ClientUpdate q = update;
  for (double& g : q.pseudo_gradient) g = static_cast<double>(static_cast<float>(g));
  q.sample_count = saturate(update.sample_count);
  return q;
}

}  // namespace fedctmc
