#pragma once

#include <array>
#include <string_view>

// Small embedded subsets of the Dale-Chall and Spache familiar-word lists.
// They cover the most frequent English words and are enough for fixtures and
// quick looks; supply the full lists with WordList::load for real analyses.

namespace mcq::word_lists {

inline constexpr std::array<std::string_view, 442> kDaleChallSubset = {
    "a", "able", "about", "above", "across", "act", "afraid", "after", "afternoon", "again",
    "against", "age", "ago", "agree", "air", "all", "almost", "alone", "along", "already",
    "also", "always", "am", "among", "an", "and", "angry", "animal", "another", "answer",
    "any", "anyone", "anything", "apple", "are", "arm", "around", "as", "ask", "at",
    "away", "baby", "back", "bad", "bag", "ball", "bank", "be", "beautiful", "because",
    "bed", "been", "before", "began", "begin", "behind", "being", "believe", "below", "best",
    "better", "between", "big", "bird", "black", "blue", "boat", "body", "book", "both",
    "box", "boy", "bread", "break", "bring", "brother", "brought", "build", "busy", "but",
    "buy", "by", "call", "came", "can", "car", "care", "carry", "cat", "catch",
    "chair", "child", "children", "city", "class", "clean", "close", "cold", "come", "could",
    "country", "cow", "cry", "cup", "cut", "dark", "day", "dear", "did", "do",
    "does", "dog", "done", "door", "down", "draw", "dream", "dress", "drink", "drive",
    "dry", "each", "early", "earth", "easy", "eat", "egg", "end", "enough", "even",
    "evening", "ever", "every", "eye", "face", "fall", "family", "far", "farm", "fast",
    "father", "feel", "feet", "few", "field", "find", "fine", "fire", "first", "fish",
    "five", "floor", "flower", "fly", "food", "foot", "for", "found", "four", "free",
    "friend", "from", "front", "full", "fun", "game", "garden", "gave", "get", "girl",
    "give", "glad", "go", "good", "got", "grass", "great", "green", "ground", "grow",
    "had", "hair", "half", "hand", "happy", "hard", "has", "hat", "have", "he",
    "head", "hear", "heard", "help", "her", "here", "high", "hill", "him", "his",
    "hold", "home", "hope", "horse", "hot", "house", "how", "i", "if", "in",
    "into", "is", "it", "its", "job", "just", "keep", "kind", "king", "knew",
    "know", "lady", "land", "large", "last", "late", "laugh", "learn", "leave", "left",
    "leg", "let", "letter", "life", "light", "like", "line", "little", "live", "long",
    "look", "lost", "lot", "love", "low", "made", "make", "man", "many", "may",
    "me", "mean", "men", "might", "milk", "mind", "money", "more", "morning", "most",
    "mother", "move", "much", "must", "my", "name", "near", "need", "never", "new",
    "next", "nice", "night", "no", "not", "nothing", "now", "of", "off", "often",
    "old", "on", "once", "one", "only", "open", "or", "other", "our", "out",
    "over", "own", "page", "paper", "part", "party", "people", "pick", "picture", "place",
    "plan", "play", "please", "poor", "put", "rain", "ran", "read", "ready", "red",
    "rest", "ride", "right", "river", "road", "room", "run", "said", "same", "sat",
    "saw", "say", "school", "sea", "see", "seem", "sell", "send", "set", "she",
    "ship", "shoe", "shop", "short", "should", "show", "side", "sing", "sister", "sit",
    "sleep", "small", "snow", "so", "some", "something", "song", "soon", "sound", "speak",
    "stand", "start", "stay", "still", "stop", "story", "street", "strong", "study", "such",
    "sun", "sure", "table", "take", "talk", "tall", "teacher", "tell", "ten", "than",
    "that", "the", "their", "them", "then", "there", "these", "they", "thing", "think",
    "this", "those", "thought", "three", "through", "time", "to", "today", "together", "told",
    "too", "took", "town", "tree", "true", "try", "turn", "two", "under", "until",
    "up", "us", "use", "very", "wait", "walk", "want", "warm", "was", "watch",
    "water", "way", "we", "week", "well", "went", "were", "what", "when", "where",
    "which", "while", "white", "who", "why", "will", "wind", "window", "with", "woman",
    "word", "work", "world", "would", "write", "year", "yes", "you", "young", "your",
    "yellow", "yesterday",
};

inline constexpr std::array<std::string_view, 253> kSpacheSubset = {
    "a", "about", "after", "again", "all", "always", "am", "an", "and", "animal",
    "any", "are", "around", "as", "ask", "at", "away", "baby", "back", "bad",
    "ball", "be", "because", "bed", "been", "before", "best", "big", "bird", "black",
    "blue", "boat", "book", "both", "box", "boy", "bring", "brother", "but", "buy",
    "by", "call", "came", "can", "car", "cat", "children", "city", "cold", "come",
    "could", "cow", "cut", "day", "did", "do", "does", "dog", "done", "door",
    "down", "draw", "drink", "each", "eat", "egg", "end", "every", "eye", "fall",
    "far", "farm", "fast", "father", "find", "fire", "first", "fish", "five", "fly",
    "for", "found", "four", "friend", "from", "full", "funny", "game", "gave", "get",
    "girl", "give", "go", "good", "got", "green", "grow", "had", "hand", "happy",
    "has", "have", "he", "help", "her", "here", "him", "his", "hold", "home",
    "horse", "hot", "house", "how", "i", "if", "in", "into", "is", "it",
    "its", "jump", "just", "keep", "kind", "know", "laugh", "let", "light", "like",
    "little", "live", "long", "look", "made", "make", "man", "many", "may", "me",
    "milk", "money", "more", "morning", "mother", "much", "must", "my", "name", "new",
    "night", "no", "not", "now", "of", "off", "old", "on", "once", "one",
    "only", "open", "or", "our", "out", "over", "own", "play", "please", "pretty",
    "put", "ran", "read", "red", "ride", "right", "road", "room", "run", "said",
    "sat", "saw", "say", "school", "see", "she", "shoe", "show", "sing", "sister",
    "sit", "sleep", "small", "so", "some", "soon", "start", "stop", "sun", "take",
    "tell", "ten", "thank", "that", "the", "their", "them", "then", "there", "these",
    "they", "thing", "think", "this", "three", "time", "to", "today", "together", "too",
    "tree", "try", "two", "under", "up", "upon", "us", "use", "very", "walk",
    "want", "warm", "was", "wash", "water", "way", "we", "well", "went", "were",
    "what", "when", "where", "which", "white", "who", "why", "will", "wish", "with",
    "yes", "you", "your",
};

}  // namespace mcq::word_lists
