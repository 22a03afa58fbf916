#pragma once

#include <sodium.h>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trustweave/ids.hpp"

namespace trustweave {

using Bytes = std::vector<std::uint8_t>;

inline void crypto_init() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium init failed");
}

using PublicKey = std::array<std::uint8_t, crypto_sign_PUBLICKEYBYTES>;
using SecretKey = std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES>;

struct KeyPair {
  PublicKey public_key{};
  SecretKey secret_key{};

  /// Deterministic keypair derived from a 64-bit seed and an entity id, so
  /// identical runs produce identical keys and signatures.
  static KeyPair derive(std::uint64_t seed, const EntityId& id) {
    crypto_init();
    std::array<std::uint8_t, crypto_sign_SEEDBYTES> kseed{};
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, kseed.size());
    std::uint8_t seed_bytes[8];
    for (int i = 0; i < 8; ++i) seed_bytes[i] = std::uint8_t(seed >> (8 * i));
    crypto_generichash_update(&st, seed_bytes, sizeof(seed_bytes));
    crypto_generichash_update(&st,
                              reinterpret_cast<const std::uint8_t*>(id.data()),
                              id.size());
    crypto_generichash_final(&st, kseed.data(), kseed.size());
    KeyPair kp;
    crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(),
                             kseed.data());
    return kp;
  }
};

inline Bytes sign(const SecretKey& sk, const std::string& message) {
  crypto_init();
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr,
                       reinterpret_cast<const std::uint8_t*>(message.data()),
                       message.size(), sk.data());
  return sig;
}

inline bool verify(const PublicKey& pk, const std::string& message,
                   const Bytes& sig) {
  crypto_init();
  if (sig.size() != crypto_sign_BYTES) return false;
  return crypto_sign_verify_detached(
             sig.data(),
             reinterpret_cast<const std::uint8_t*>(message.data()),
             message.size(), pk.data()) == 0;
}

/// Maps entity ids to registered public keys. Distributed with the scenario.
class KeyRegistry {
 public:
  void register_key(const EntityId& id, const PublicKey& pk) { keys_[id] = pk; }

  std::optional<PublicKey> lookup(const EntityId& id) const {
    auto it = keys_.find(id);
    if (it == keys_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<EntityId, PublicKey> keys_;
};

}  // namespace trustweave
