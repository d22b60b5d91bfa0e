#pragma once

#include <string_view>
#include <unordered_set>

namespace kgrag {

/// Base forms plus common irregular inflections. Regular -s/-ed/-ing forms
/// are reduced to these by the extractor before lookup.
inline const std::unordered_set<std::string_view>& default_verb_lexicon() {
    static const std::unordered_set<std::string_view> verbs = {
        // be / have / do and modals
        "am", "is", "are", "was", "were", "be", "been", "has", "have", "had", "do", "does",
        "did", "will", "can", "could", "should", "would", "must", "may", "might", "shall",
        // irregular past and participle forms
        "went", "gone", "met", "saw", "seen", "got", "gotten", "made", "took", "taken",
        "came", "said", "told", "gave", "given", "found", "thought", "brought", "bought",
        "left", "felt", "kept", "began", "begun", "ran", "sent", "spent", "built", "held",
        "wrote", "written", "ate", "eaten", "drank", "drove", "driven", "flew", "flown",
        "knew", "known", "led", "lost", "paid", "sat", "stood", "taught", "won", "chose",
        "forgot", "heard", "read", "set", "put", "cut", "let", "hit", "became", "wore",
        "slept", "swam", "sang", "spoke", "understood", "caught", "fought", "sold", "shut",
        // base forms
        "accept", "add", "agree", "allow", "answer", "arrange", "arrive", "ask", "attend",
        "avoid", "bake", "become", "begin", "believe", "book", "borrow", "break", "bring",
        "build", "buy", "call", "cancel", "care", "carry", "catch", "celebrate", "change",
        "check", "choose", "clean", "close", "come", "complete", "confirm", "consider",
        "cook", "cover", "create", "dance", "decide", "deliver", "discuss", "drink", "drive",
        "eat", "email", "enjoy", "expect", "explain", "fast", "feel", "fight", "fill", "find",
        "finish", "fix", "fly", "follow", "forget", "get", "give", "go", "grab", "greet",
        "happen", "hate", "hear", "help", "hike", "hold", "host", "hope", "invite", "join",
        "keep", "know", "lead", "learn", "leave", "lend", "like", "listen", "live", "look",
        "lose", "love", "make", "manage", "mean", "meet", "miss", "move", "need", "offer",
        "open", "order", "organize", "pack", "pay", "pick", "plan", "play", "practice",
        "prefer", "prepare", "present", "pitch", "promise", "provide", "reach", "receive",
        "recommend", "rehearse", "remember", "remind", "rent", "reply", "report", "request",
        "reschedule", "reserve", "return", "review", "ride", "run", "say", "schedule", "see",
        "seem", "sell", "send", "share", "show", "sign", "sing", "sit", "skip", "sleep",
        "speak", "spend", "stand", "start", "stay", "stop", "study", "submit", "suggest",
        "swim", "take", "talk", "teach", "tell", "text", "thank", "think", "travel", "try",
        "turn", "understand", "update", "use", "visit", "wait", "walk", "want", "watch",
        "wear", "win", "wish", "work", "worry", "write",
    };
    return verbs;
}

} // namespace kgrag
