//! Name and place lists sampled by the synthetic generator.

pub const GIVEN_NAMES: &[&str] = &[
    "james", "mary", "john", "patricia", "robert", "jennifer", "michael", "linda", "william",
    "elizabeth", "david", "barbara", "richard", "susan", "joseph", "jessica", "thomas", "sarah",
    "charles", "karen", "christopher", "nancy", "daniel", "lisa", "matthew", "betty", "anthony",
    "margaret", "mark", "sandra", "donald", "ashley", "steven", "kimberly", "paul", "emily",
    "andrew", "donna", "joshua", "michelle", "kenneth", "dorothy", "kevin", "carol", "brian",
    "amanda", "george", "melissa", "timothy", "deborah", "ronald", "stephanie", "edward",
    "rebecca", "jason", "sharon", "jeffrey", "laura", "ryan", "cynthia", "jacob", "kathleen",
    "gary", "amy", "nicholas", "angela", "eric", "shirley", "jonathan", "anna", "stephen",
    "brenda", "larry", "pamela", "justin", "emma", "scott", "nicole", "brandon", "helen",
    "benjamin", "samantha", "samuel", "katherine", "gregory", "christine", "alexander", "debra",
    "frank", "rachel", "patrick", "carolyn", "raymond", "janet", "jack", "catherine", "dennis",
    "maria", "jerry", "heather", "tyler", "diane", "aaron", "ruth", "jose", "julie", "adam",
    "olivia", "nathan", "joyce", "henry", "virginia", "douglas", "victoria", "zachary", "kelly",
    "peter", "lauren", "kyle", "christina", "ethan", "joan", "walter", "evelyn", "noah",
    "judith", "jeremy", "megan", "christian", "andrea", "keith", "cheryl", "roger", "hannah",
    "terry", "jacqueline", "gerald", "martha", "harold", "gloria", "sean", "teresa", "austin",
    "ann", "carl", "sara", "arthur", "madison", "lawrence", "frances", "dylan", "kathryn",
    "jesse", "janice", "jordan", "jean", "bryan", "abigail", "billy", "alice", "joe", "judy",
    "bruce", "sophia", "gabriel", "grace", "logan", "denise", "albert", "amber", "willie",
    "doris", "alan", "marilyn", "juan", "danielle", "wayne", "beverly", "elijah", "isabella",
    "randy", "theresa", "roy", "diana", "vincent", "natalie", "ralph", "brittany", "eugene",
    "charlotte", "russell", "marie", "bobby", "kayla", "mason", "alexis", "philip", "lori",
];

pub const SURNAMES: &[&str] = &[
    "smith", "johnson", "williams", "brown", "jones", "garcia", "miller", "davis", "rodriguez",
    "martinez", "hernandez", "lopez", "gonzalez", "wilson", "anderson", "thomas", "taylor",
    "moore", "jackson", "martin", "lee", "perez", "thompson", "white", "harris", "sanchez",
    "clark", "ramirez", "lewis", "robinson", "walker", "young", "allen", "king", "wright",
    "scott", "torres", "nguyen", "hill", "flores", "green", "adams", "nelson", "baker", "hall",
    "rivera", "campbell", "mitchell", "carter", "roberts", "gomez", "phillips", "evans",
    "turner", "diaz", "parker", "cruz", "edwards", "collins", "reyes", "stewart", "morris",
    "morales", "murphy", "cook", "rogers", "gutierrez", "ortiz", "morgan", "cooper", "peterson",
    "bailey", "reed", "kelly", "howard", "ramos", "kim", "cox", "ward", "richardson", "watson",
    "brooks", "chavez", "wood", "james", "bennett", "gray", "mendoza", "ruiz", "hughes", "price",
    "alvarez", "castillo", "sanders", "patel", "myers", "long", "ross", "foster", "jimenez",
    "powell", "jenkins", "perry", "russell", "sullivan", "bell", "coleman", "butler",
    "henderson", "barnes", "gonzales", "fisher", "vasquez", "simmons", "romero", "jordan",
    "patterson", "alexander", "hamilton", "graham", "reynolds", "griffin", "wallace", "moreno",
    "west", "cole", "hayes", "bryant", "herrera", "gibson", "ellis", "tran", "medina", "aguilar",
    "stevens", "murray", "ford", "castro", "marshall", "owens", "harrison", "fernandez",
    "mcdonald", "woods", "washington", "kennedy", "wells", "vargas", "henry", "chen", "freeman",
    "webb", "tucker", "guzman", "burns", "crawford", "olson", "simpson", "porter", "hunter",
    "gordon", "mendez", "silva", "shaw", "snyder", "mason", "dixon", "munoz", "hunt", "hicks",
    "holmes", "palmer", "wagner", "black", "robertson", "boyd", "rose", "stone", "salazar",
    "fox", "warren", "mills", "meyer", "rice", "schmidt", "garza", "daniels", "ferguson",
    "nichols", "stephens", "soto", "weaver", "ryan", "gardner", "payne", "grant", "dunn",
];

pub const SUBURBS: &[&str] = &[
    "raleigh", "charlotte", "greensboro", "durham", "winston salem", "fayetteville", "cary",
    "wilmington", "high point", "concord", "asheville", "greenville", "gastonia", "jacksonville",
    "chapel hill", "rocky mount", "burlington", "huntersville", "wilson", "kannapolis", "apex",
    "hickory", "wake forest", "indian trail", "mooresville", "goldsboro", "monroe", "salisbury",
    "holly springs", "matthews", "new bern", "sanford", "cornelius", "garner", "thomasville",
    "statesville", "asheboro", "mint hill", "fuquay varina", "kernersville", "morrisville",
    "lumberton", "kinston", "carrboro", "havelock", "shelby", "clemmons", "lexington",
    "clayton", "elizabeth city", "boone", "hope mills", "lenoir", "knightdale", "morganton",
    "pinehurst", "mebane", "albemarle", "graham", "eden", "reidsville", "laurinburg",
    "roanoke rapids", "henderson", "southern pines", "tarboro", "archdale", "waxhaw", "lewisville",
    "mount airy", "smithfield", "hendersonville", "harrisburg", "davidson", "stallings",
    "weddington", "belmont", "spring lake", "morehead city", "kings mountain", "wendell",
    "zebulon", "oxford", "dunn", "washington", "newton", "forest city", "whiteville", "siler city",
];
