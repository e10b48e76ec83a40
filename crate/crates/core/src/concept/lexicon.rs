// Word lists for the baseline concept tagger. All entries lowercase.

pub(super) const CLOSED_CLASS: &[&str] = &[
    // determiners and quantifiers
    "a", "an", "the", "this", "that", "these", "those", "some", "any", "no", "every", "each",
    "either", "neither", "all", "both", "few", "many", "much", "more", "most", "several",
    "such", "other", "another", "own", "same", "enough", "less", "least", "lot",
    // pronouns
    "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "yourselves", "he",
    "him", "his", "himself", "she", "her", "hers", "herself", "it", "its", "itself", "we", "us",
    "our", "ours", "ourselves", "they", "them", "their", "theirs", "themselves", "one",
    "someone", "somebody", "something", "anyone", "anybody", "anything", "everyone",
    "everybody", "everything", "nobody", "nothing", "none", "who", "whom", "whose", "which",
    "what", "whatever", "whoever", "whichever",
    // prepositions
    "about", "above", "across", "after", "against", "along", "among", "around", "as", "at",
    "before", "behind", "below", "beneath", "beside", "besides", "between", "beyond", "by",
    "despite", "down", "during", "except", "for", "from", "in", "inside", "into", "like",
    "near", "of", "off", "on", "onto", "out", "outside", "over", "past", "since", "through",
    "throughout", "till", "to", "toward", "towards", "under", "underneath", "until", "up",
    "upon", "with", "within", "without", "via", "per", "amid",
    // conjunctions and subordinators
    "and", "or", "but", "nor", "so", "yet", "because", "although", "though", "if", "unless",
    "while", "whereas", "whether", "than", "once", "when", "where", "why", "how", "whenever",
    "wherever", "then",
    // auxiliaries and modals
    "be", "am", "is", "are", "was", "were", "been", "being", "have", "has", "had", "having",
    "do", "does", "did", "doing", "done", "will", "would", "shall", "should", "can", "could",
    "may", "might", "must", "ought", "'s", "'re", "'ve", "'ll", "'d", "'m", "n't", "isn't",
    "aren't", "wasn't", "weren't", "don't", "doesn't", "didn't", "won't", "wouldn't",
    "can't", "couldn't", "shouldn't", "hasn't", "haven't", "hadn't", "mustn't",
    // particles, negation, interjections
    "not", "never", "there", "here", "yes", "oh", "well", "please",
];

pub(super) const ADJECTIVES_ADVERBS: &[&str] = &[
    "good", "bad", "big", "small", "large", "little", "long", "short", "old", "new", "young",
    "high", "low", "great", "happy", "sad", "angry", "tired", "hungry", "thirsty", "cold",
    "hot", "warm", "cool", "wet", "dry", "clean", "dirty", "early", "late", "fast", "slow",
    "quick", "quiet", "loud", "easy", "hard", "soft", "strong", "weak", "rich", "poor",
    "full", "empty", "dark", "bright", "light", "heavy", "right", "wrong", "true", "false",
    "free", "open", "closed", "ready", "sure", "afraid", "alone", "able", "glad", "nice",
    "kind", "busy", "sick", "safe", "calm", "proud", "brave", "close", "far", "deep",
    "wide", "red", "blue", "green", "white", "black", "yellow", "brown", "first", "last",
    "next", "only", "just", "very", "really", "quite", "too", "also", "again", "still",
    "already", "almost", "always", "often", "sometimes", "soon", "now", "today", "tonight",
    "tomorrow", "yesterday", "away", "back", "even", "ever", "instead", "together", "maybe",
    "perhaps", "rather", "however", "finally", "certain", "whole", "main", "real", "best",
    "better", "worse", "worst", "fine", "entire", "public", "local", "general", "common",
    "pretty", "simple", "special", "strange", "different", "important", "possible",
    "beautiful", "careful", "nervous", "excited", "upset", "lonely", "friendly", "lucky",
    "fresh", "sweet", "bitter", "huge", "tiny", "thin", "thick", "rough", "smooth", "sharp",
    "gentle", "polite", "rude", "serious", "funny", "silly", "smart", "clever", "wise",
    "foolish", "curious", "eager", "anxious", "grateful", "honest", "loyal", "patient",
    "ancient", "modern", "famous", "popular", "wild", "quickly", "slowly", "carefully",
    "never", "forward", "outside", "inside", "upstairs", "downstairs", "abroad", "home",
    "fair", "main", "several", "extra", "single", "double", "whole", "half", "two", "three",
    "four", "five", "six", "seven", "eight", "nine", "ten", "hundred", "thousand", "million",
];

pub(super) const NOUNS: &[&str] = &[
    "man", "woman", "child", "children", "people", "person", "friend", "family", "mother",
    "father", "parent", "brother", "sister", "son", "daughter", "wife", "husband", "baby",
    "boy", "girl", "teacher", "student", "doctor", "nurse", "driver", "worker", "boss",
    "neighbor", "king", "queen", "soldier", "police", "officer", "team", "group", "crowd",
    "house", "home", "room", "kitchen", "door", "window", "wall", "floor", "roof", "bed",
    "table", "chair", "desk", "car", "bus", "train", "plane", "boat", "ship", "bike", "road",
    "street", "city", "town", "village", "country", "world", "school", "class", "office",
    "store", "shop", "market", "bank", "church", "hospital", "hotel", "restaurant", "park",
    "garden", "farm", "field", "forest", "tree", "flower", "grass", "river", "lake", "sea",
    "ocean", "beach", "mountain", "hill", "island", "sky", "sun", "moon", "star", "rain",
    "snow", "wind", "storm", "weather", "water", "fire", "air", "earth", "stone", "rock",
    "sand", "food", "meal", "breakfast", "lunch", "dinner", "bread", "cake", "meat", "fish",
    "egg", "milk", "coffee", "tea", "wine", "beer", "fruit", "apple", "rice", "soup",
    "ingredient", "dog", "cat", "horse", "bird", "cow", "pig", "animal", "money", "price",
    "job", "work", "business", "company", "market", "game", "ball", "music", "song", "movie",
    "film", "book", "story", "letter", "paper", "page", "word", "name", "language", "idea",
    "question", "answer", "problem", "reason", "result", "effect", "way", "thing", "part",
    "place", "area", "side", "end", "time", "day", "night", "morning", "evening", "week",
    "month", "year", "hour", "minute", "moment", "life", "death", "health", "body", "head",
    "face", "eye", "ear", "mouth", "hand", "arm", "leg", "foot", "feet", "heart", "mind",
    "hair", "voice", "clothes", "shirt", "shoe", "coat", "hat", "bag", "box", "key", "phone",
    "computer", "camera", "picture", "photo", "gift", "present", "party", "wedding",
    "birthday", "holiday", "trip", "journey", "vacation", "war", "battle", "peace", "law",
    "rule", "court", "government", "state", "army", "church", "god", "energy", "power",
    "nap", "sleep", "dream", "plan", "goal", "chance", "risk", "help", "advice", "news",
    "information", "knowledge", "skill", "lesson", "exam", "test", "homework", "degree",
    "career", "salary", "rent", "bill", "debt", "ticket", "seat", "line", "race", "match",
    "prize", "medal", "award", "church", "mail", "message", "email", "call", "meeting",
    "interview", "contract", "deal", "report", "research", "science", "history", "art",
    "painting", "guitar", "piano", "dance", "concert", "show", "stage", "crowd", "fan",
    "glass", "cup", "plate", "bottle", "knife", "fork", "spoon", "pot", "pan", "oven",
    "stove", "fridge", "toy", "tool", "machine", "engine", "wheel", "light", "lamp",
    "candle", "map", "bridge", "tower", "castle", "museum", "library", "airport", "station",
    "corner", "hall", "yard", "fence", "gate", "path", "trail", "camp", "tent", "blanket",
    "pillow", "towel", "soap", "medicine", "pain", "fever", "cold", "injury", "accident",
    "surgery", "test", "umbrella", "jacket", "dress", "ring", "necklace", "watch", "clock",
];

pub(super) const VERBS: &[&str] = &[
    "go", "went", "gone", "come", "came", "get", "got", "gotten", "make", "made", "take",
    "took", "taken", "give", "gave", "given", "see", "saw", "seen", "know", "knew", "known",
    "think", "thought", "say", "said", "tell", "told", "find", "found", "want", "need",
    "like", "love", "hate", "feel", "felt", "try", "use", "ask", "work", "call", "keep",
    "kept", "let", "begin", "began", "begun", "seem", "help", "show", "hear", "heard", "play",
    "run", "ran", "move", "live", "believe", "bring", "brought", "happen", "write", "wrote",
    "written", "sit", "sat", "stand", "stood", "lose", "lost", "pay", "paid", "meet", "met",
    "include", "continue", "set", "learn", "change", "lead", "led", "understand",
    "understood", "watch", "follow", "stop", "create", "speak", "spoke", "spoken", "read",
    "spend", "spent", "grow", "grew", "grown", "open", "walk", "win", "won", "offer",
    "remember", "consider", "appear", "buy", "bought", "wait", "serve", "die", "send",
    "sent", "expect", "build", "built", "stay", "fall", "fell", "fallen", "cut", "reach",
    "kill", "remain", "suggest", "raise", "pass", "sell", "sold", "require", "report",
    "decide", "pull", "push", "cook", "eat", "ate", "eaten", "drink", "drank", "sleep",
    "slept", "wake", "woke", "woken", "drive", "drove", "driven", "ride", "rode", "fly",
    "flew", "swim", "swam", "sing", "sang", "dance", "laugh", "cry", "smile", "shout",
    "jump", "climb", "carry", "catch", "caught", "throw", "threw", "kick", "hit", "break",
    "broke", "broken", "fix", "clean", "wash", "dress", "wear", "wore", "worn", "hold",
    "held", "look", "listen", "talk", "visit", "travel", "arrive", "leave", "left",
    "return", "enter", "join", "marry", "study", "teach", "taught", "practice", "prepare",
    "plan", "invite", "celebrate", "thank", "forgive", "forgot", "forget", "apologize",
    "borrow", "lend", "lent", "steal", "stole", "hide", "hid", "search", "choose", "chose",
    "save", "spend", "earn", "rent", "order", "deliver", "pack", "unpack", "fill", "pour",
    "bake", "boil", "fry", "chop", "mix", "taste", "smell", "touch", "hug", "kiss", "fight",
    "fought", "argue", "agree", "refuse", "accept", "admit", "allow", "avoid", "attend",
    "fail", "pass", "graduate", "hire", "fire", "quit", "retire", "relax", "rest", "worry",
    "hope", "wish", "pray", "shop", "paint", "draw", "drew", "drawn", "film", "record",
    "type", "print", "post", "text", "phone", "email", "answer", "reply", "explain",
    "describe", "discuss", "mention", "announce", "complain", "protect", "attack", "defend",
    "escape", "chase", "rescue", "heal", "hurt", "injure", "bleed", "recover", "breathe",
    "sweat", "shiver", "yawn", "sneeze", "cough", "nap", "hurry", "rush", "wander", "lie",
    "lay", "sink", "sank", "float", "burn", "freeze", "froze", "melt", "rain", "snow",
    "shine", "shone", "notice", "realize", "recognize", "imagine", "wonder", "guess",
    "doubt", "trust", "fear", "miss", "enjoy", "prefer", "care", "matter", "mean", "meant",
    "put", "shut", "hang", "hung", "lift", "drop", "share", "trade", "lock", "unlock",
    "knock", "ring", "rang", "feed", "fed", "water", "plant", "pick", "gather", "collect",
];
