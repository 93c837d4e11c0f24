#include "idiomspace/errors.hpp"
#include "idiomspace/oracle_lm.hpp"
#include "idiomspace/providers.hpp"

namespace idiomspace::providers {

std::unique_ptr<Provider> open_provider(const ProviderDescriptor& d, const ProviderOptions& options) {
  switch (d.kind) {
    case ProviderDescriptor::Kind::toy:
      return std::make_unique<oracle_lm::ToyProvider>(oracle_lm::MarkovModel::load(d.argument),
                                                      options.embed_window);
    case ProviderDescriptor::Kind::subprocess:
      return std::make_unique<ProtocolClient>(spawn_subprocess(d.argument));
    case ProviderDescriptor::Kind::socket:
      return std::make_unique<ProtocolClient>(connect_unix_socket(d.argument));
  }
  throw ConfigError("unsupported provider descriptor");
}

}  // namespace idiomspace::providers
