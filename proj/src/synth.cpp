#include "awi/synth.hpp"

#include <array>
#include <cstdio>
#include <stdexcept>

#include "awi/rng.hpp"

namespace awi {

namespace {

const std::array<const char*, 12> kProducts = {
    "atlas-mail",   "zephyr-vpn",    "quartz-db",     "nimbus-drive",
    "pulse-chat",   "vertex-cad",    "orion-browser", "krypton-av",
    "mosaic-photos", "tempo-calendar", "garnet-wallet", "falcon-editor"};

const std::array<const char*, 10> kIssues = {
    "crashing on startup",     "freezing randomly",       "showing a black screen",
    "refusing to sync",        "dropping the connection", "failing to update",
    "eating too much memory",  "printing blank pages",    "logging me out",
    "corrupting saved files"};

const std::array<const char*, 6> kGreetUser = {
    "hello", "hi there", "good morning", "hello i need some help",
    "hi i have a question", "hey"};

const std::array<const char*, 4> kGreetAgent = {
    "hello how can i help you today", "hi what can i do for you",
    "good day how may i assist you", "hello you have reached support"};

const std::array<const char*, 5> kProblemUser = {
    "my {p} keeps {i}", "i have a problem with {p} it keeps {i}",
    "{p} is {i} since yesterday", "help please my {p} started {i} this morning",
    "i am stuck my {p} will not stop {i}"};

const std::array<const char*, 4> kAckAgent = {
    "sorry to hear that let me check", "sorry for the trouble i can help",
    "i understand let us fix it", "thanks for reporting i will check"};

const std::array<const char*, 3> kClarifyAgent = {
    "which version of {p} are you running", "do you see an error code from {p}",
    "how long has {p} been doing this"};

const std::array<const char*, 4> kDetailUser = {
    "the error code is {c}", "i see {c} on the screen", "it shows {c} every time",
    "the message says {c}"};

const std::array<const char*, 3> kThanksAgent = {
    "thank you one moment please", "got it give me a moment",
    "thanks let me take a look"};

const std::array<const char*, 2> kEchoAgent = {
    "let me look up {c} for you", "okay checking what {c} means"};

const std::array<const char*, 5> kConfirmUser = {"ok send me the fix", "sure what should i do",
                                                 "yes please help", "go ahead", "alright"};

// How strongly each confirmation phrasing signals that a concrete fix (not
// a filler acknowledgement) follows, centered on specific_prob = 0.5. The
// overlap keeps the turn-4 conditional a genuine mixture, so specificity
// rewards can move the decision boundary without erasing whole responses.
const std::array<double, 5> kConfirmFixShare = {0.9, 0.7, 0.5, 0.3, 0.1};

const std::array<const char*, 6> kFixAgent = {
    "please open {u} and follow the steps",
    "visit {u} and run the repair tool",
    "reinstall {p} using the installer at {u}",
    "go to {u} and apply the patch",
    "update {p} from {u} and restart",
    "open {u} then clear the {p} cache"};

const std::array<const char*, 4> kFillerAgent = {
    "okay thank you for that information", "alright one moment while i check",
    "thank you for your patience", "let me check that for you"};

const std::array<const char*, 3> kOutcomeGoodUser = {
    "it works now thank you", "that fixed it", "great it is working again"};

const std::array<const char*, 3> kOutcomeBadUser = {
    "it is still not working", "no luck same problem", "that did not help"};

const std::array<const char*, 3> kWrapupAgent = {
    "glad to hear that anything else", "wonderful anything else you need",
    "great do you need anything else"};

const std::array<const char*, 3> kFollowupAgent = {
    "restart and tell me if {c} comes back",
    "i will escalate the code {c} to our engineers",
    "let us reinstall the code {c} points to a broken install"};

const std::array<const char*, 3> kSecondUser = {
    "actually i also have a question about {p}", "can you also check {p} for me",
    "one more thing my {p} acts weird too"};

const std::array<const char*, 3> kAskSecondAgent = {
    "sure what is happening with {p}", "of course what is the problem with {p}",
    "happy to help what is {p} doing"};

const std::array<const char*, 3> kProblemSecondUser = {
    "{p} keeps {i}", "well {p} is {i}", "it is {i} almost every day"};

const std::array<const char*, 3> kCloseUser = {
    "that is all thank you bye", "thanks for the help goodbye", "perfect thanks bye"};

const std::array<const char*, 4> kCloseAgent = {
    "you are welcome have a great day", "thank you goodbye",
    "happy to help take care", "glad i could help bye"};

// dialogue length 1..8, mean around 5.6 so a 10% test split of 2000
// dialogues still holds over 1000 turns
const std::array<int, 8> kLenWeights = {2, 4, 6, 12, 18, 22, 22, 14};

std::string fill_slot(std::string tmpl, const std::string& key, const std::string& value) {
  size_t at = tmpl.find(key);
  while (at != std::string::npos) {
    tmpl.replace(at, key.size(), value);
    at = tmpl.find(key, at + value.size());
  }
  return tmpl;
}

std::string hex8(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(8, '0');
  for (int i = 7; i >= 0; --i) {
    s[size_t(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

struct Slots {
  const SynthConfig& cfg;
  std::vector<std::string> codes;

  explicit Slots(const SynthConfig& c) : cfg(c) {
    Rng pool(c.seed ^ 0x51ab5u);
    for (size_t i = 0; i < c.n_error_codes; ++i)
      codes.push_back("0x" + hex8(pool.next_u64()));
  }

  std::string url(size_t product, size_t issue) const {
    size_t page = 1000 + (product * 31 + issue * 7) % cfg.n_kb_pages;
    return std::string("https://support.example.com/") + kProducts[product] + "/kb-" +
           std::to_string(page);
  }
};

}  // namespace

size_t synth_template_count() {
  return kGreetAgent.size() + kAckAgent.size() + kClarifyAgent.size() +
         kThanksAgent.size() + kEchoAgent.size() + kFixAgent.size() + kFillerAgent.size() +
         kWrapupAgent.size() + kFollowupAgent.size() + kAskSecondAgent.size() +
         kCloseAgent.size();
}

// Agent responses are deterministic functions of observable dialogue state
// (which user phrasing was used, which product/issue/code the user named),
// so the conditional distribution a model has to fit is sharp. The only
// stochastic branch kept is the specific-vs-filler resolution at turn 4,
// and it is signalled by the user's confirmation phrasing.
RawCorpus synth_generate(const SynthConfig& cfg) {
  if (cfg.n_dialogues < 1) throw std::invalid_argument("synth_generate: n_dialogues < 1");
  if (cfg.specific_prob < 0 || cfg.specific_prob > 1)
    throw std::invalid_argument("synth_generate: specific_prob outside [0,1]");
  Slots slots(cfg);
  Rng rng(cfg.seed);
  int len_total = 0;
  for (int w : kLenWeights) len_total += w;

  RawCorpus corpus;
  corpus.reserve(cfg.n_dialogues);
  for (size_t di = 0; di < cfg.n_dialogues; ++di) {
    RawDialogue d;
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "synth-%06zu", di);
    d.id = idbuf;

    int draw = int(rng.uniform() * len_total);
    size_t len = 1;
    for (size_t i = 0; i < kLenWeights.size(); ++i) {
      draw -= kLenWeights[i];
      if (draw < 0) {
        len = i + 1;
        break;
      }
    }

    size_t product = rng.index(kProducts.size());
    size_t issue = rng.index(kIssues.size());
    size_t code_at = rng.index(slots.codes.size());
    const std::string& code = slots.codes[code_at];
    size_t product2 = rng.index(kProducts.size());
    size_t issue2 = rng.index(kIssues.size());

    for (size_t turn = 1; turn <= len; ++turn) {
      RawTurn t;
      switch (turn) {
        case 1: {
          size_t ug = rng.index(kGreetUser.size());
          t.user = kGreetUser[ug];
          t.agent = kGreetAgent[ug % kGreetAgent.size()];
          break;
        }
        case 2: {
          std::string u = fill_slot(kProblemUser[rng.index(kProblemUser.size())], "{p}",
                                    kProducts[product]);
          t.user = fill_slot(std::move(u), "{i}", kIssues[issue]);
          if (issue % 2 == 0)
            t.agent = kAckAgent[product % kAckAgent.size()];
          else
            t.agent = fill_slot(kClarifyAgent[product % kClarifyAgent.size()], "{p}",
                                kProducts[product]);
          break;
        }
        case 3:
          t.user = fill_slot(kDetailUser[rng.index(kDetailUser.size())], "{c}", code);
          if (code_at % 5 < 3)
            t.agent = kThanksAgent[code_at % kThanksAgent.size()];
          else
            t.agent = fill_slot(kEchoAgent[code_at % kEchoAgent.size()], "{c}", code);
          break;
        case 4: {
          size_t uc = rng.index(kConfirmUser.size());
          t.user = kConfirmUser[uc];
          double share = kConfirmFixShare[uc] + (cfg.specific_prob - 0.5);
          if (share < 0) share = 0;
          if (share > 1) share = 1;
          if (rng.uniform() < share) {
            std::string a = fill_slot(kFixAgent[(product + issue) % kFixAgent.size()], "{u}",
                                      slots.url(product, issue));
            t.agent = fill_slot(std::move(a), "{p}", kProducts[product]);
          } else {
            t.agent = kFillerAgent[(2 * product + issue) % kFillerAgent.size()];
          }
          break;
        }
        case 5:
          if (rng.uniform() < 0.7) {
            t.user = kOutcomeGoodUser[rng.index(kOutcomeGoodUser.size())];
            t.agent = kWrapupAgent[product % kWrapupAgent.size()];
          } else {
            t.user = kOutcomeBadUser[rng.index(kOutcomeBadUser.size())];
            t.agent = fill_slot(kFollowupAgent[code_at % kFollowupAgent.size()], "{c}", code);
          }
          break;
        case 6: {
          t.user = fill_slot(kSecondUser[rng.index(kSecondUser.size())], "{p}",
                             kProducts[product2]);
          t.agent = fill_slot(kAskSecondAgent[product2 % kAskSecondAgent.size()], "{p}",
                              kProducts[product2]);
          break;
        }
        case 7: {
          std::string u = fill_slot(kProblemSecondUser[rng.index(kProblemSecondUser.size())],
                                    "{p}", kProducts[product2]);
          t.user = fill_slot(std::move(u), "{i}", kIssues[issue2]);
          std::string a = fill_slot(kFixAgent[(product2 + issue2) % kFixAgent.size()], "{u}",
                                    slots.url(product2, issue2));
          t.agent = fill_slot(std::move(a), "{p}", kProducts[product2]);
          break;
        }
        case 8:
        default: {
          size_t uc = rng.index(kCloseUser.size());
          t.user = kCloseUser[uc];
          t.agent = kCloseAgent[(uc + product) % kCloseAgent.size()];
          break;
        }
      }
      d.turns.push_back(std::move(t));
    }
    corpus.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace awi
