#include "modchain/vocab.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "modchain/digest.hpp"
#include "modchain/errors.hpp"

namespace modchain {

namespace {

// 200 plural nouns. Do not reorder or edit in place: name allocation indexes
// into this list, so any change is a new vocabulary version.
constexpr std::array<const char*, 200> kBuiltinNames = {
    "hats",        "chairs",     "harps",      "blocks",    "nautiluses",
    "scarves",     "celery",     "boots",      "spruces",   "whelks",
    "batons",      "maples",     "onions",     "opals",     "needles",
    "cats",        "violets",    "flutes",     "markers",   "aspens",
    "wolves",      "tokens",     "cranes",     "herons",    "otters",
    "badgers",     "falcons",    "ferrets",    "geckos",    "hedgehogs",
    "iguanas",     "jackals",    "koalas",     "lemurs",    "marmots",
    "newts",       "ocelots",    "pandas",     "quails",    "rabbits",
    "seals",       "toads",      "urchins",    "vipers",    "wombats",
    "yaks",        "zebras",     "moles",      "shrews",    "storks",
    "swans",       "owls",       "ravens",     "sparrows",  "finches",
    "wrens",       "gulls",      "pelicans",   "puffins",   "terns",
    "crabs",       "shrimps",    "squids",     "clams",     "oysters",
    "mussels",     "snails",     "slugs",      "beetles",   "crickets",
    "mantises",    "moths",      "wasps",      "hornets",   "ants",
    "bees",        "birches",    "cedars",     "willows",   "poplars",
    "orchids",     "tulips",     "daisies",    "lilies",    "roses",
    "pines",       "oaks",       "elms",       "clovers",   "reeds",
    "sedges",      "thistles",   "dahlias",    "peonies",   "irises",
    "asters",      "zinnias",    "ferns",      "mosses",    "alders",
    "beeches",     "hollies",    "junipers",   "laurels",   "magnolias",
    "myrtles",     "palms",      "sunflowers", "marigolds", "poppies",
    "lilacs",      "leeks",      "plums",      "pears",     "figs",
    "dates",       "olives",     "melons",     "grapes",    "lemons",
    "limes",       "mangoes",    "papayas",    "radishes",  "turnips",
    "beets",       "carrots",    "peppers",    "squashes",  "gourds",
    "loaves",      "muffins",    "bagels",     "pretzels",  "waffles",
    "pancakes",    "drums",      "bells",      "kites",     "lamps",
    "mirrors",     "anchors",    "baskets",    "candles",   "ribbons",
    "spoons",      "forks",      "plates",     "mugs",      "jars",
    "crates",      "barrels",    "ropes",      "nets",      "oars",
    "paddles",     "tents",      "flags",      "banners",   "medals",
    "coins",       "stamps",     "crayons",    "pencils",   "erasers",
    "rulers",      "globes",     "scrolls",    "quills",    "hammers",
    "wrenches",    "pliers",     "chisels",    "saws",      "ladders",
    "buckets",     "brooms",     "mops",       "sponges",   "towels",
    "pillows",     "blankets",   "quilts",     "rugs",      "vases",
    "bowls",       "kettles",    "trays",      "lanterns",  "torches",
    "compasses",   "telescopes", "violins",    "cellos",    "trumpets",
    "banjos",      "whistles",   "gongs",      "chimes",    "tambourines",
};

void check_names(const std::vector<std::string>& names, const std::string& origin) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& n = names[i];
    if (n.empty()) {
      throw InvalidConfig(origin + ": empty name at line " + std::to_string(i + 1));
    }
    if (n.find_first_of(" \t\r") != std::string::npos) {
      throw InvalidConfig(origin + ": name contains whitespace at line " + std::to_string(i + 1));
    }
    if (!seen.insert(n).second) {
      throw InvalidConfig(origin + ": duplicate name '" + n + "' at line " + std::to_string(i + 1));
    }
  }
  if (names.empty()) throw InvalidConfig(origin + ": no names");
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> names, std::string version)
    : names_(std::move(names)), version_(std::move(version)) {
  check_names(names_, "vocabulary '" + version_ + "'");
}

const Vocabulary& builtin_vocabulary() {
  static const Vocabulary vocab = [] {
    std::vector<std::string> names(kBuiltinNames.begin(), kBuiltinNames.end());
    return Vocabulary(std::move(names), "builtin-v1");
  }();
  return vocab;
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open vocabulary file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();

  std::vector<std::string> names;
  std::string line;
  std::istringstream lines(content);
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    names.push_back(line);
  }
  return Vocabulary(std::move(names), "file-" + sha256_hex(content).substr(0, 12));
}

}  // namespace modchain
