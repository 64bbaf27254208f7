#pragma once

// Example tables transcribed from the benchmark's published instruction boxes.

namespace appendix {

inline constexpr const char* kSyntheaDU1 =
    "ID\tRACE\tGENDER\tINCOME\n"
    "001\tWhite\tMale\t45000\n"
    "002\tBlack\tFemale\t52000\n"
    "003\tWhite\tFemale\t28000\n"
    "004\tWhite\tMale\t36000";

inline constexpr const char* kSyntheaDR1 =
    "PATIENT\tDESCRIPTION\tVALUE\tUNITS\tTYPE\n"
    "001\tBody Weight\t71.4\tkg\tnumeric\n"
    "002\tPain severity\t2\tscore\tnumeric\n"
    "002\tPain severity\t4\tscore\tnumeric\n"
    "002\tHeart rate\t88\tmin\tnumeric\n"
    "003\tPain severity\t1\tscore\tnumeric\n"
    "002\tRespiratory Rate\t16\tmin\tnumeric\n"
    "001\tPain severity\t3\tscore\tnumeric";

inline constexpr const char* kSyntheaDR2 =
    "PATIENT\tDESCRIPTION\tVALUE\tUNITS\tTYPE\n"
    "001\tPain severity\t5\tscore\tnumeric\n"
    "003\tPain severity\t2\tscore\tnumeric\n"
    "002\tHeart rate\t91\tmin\tnumeric\n"
    "003\tPain severity\t3\tscore\tnumeric\n"
    "003\tRespiratory Rate\t17\tmin\tnumeric\n"
    "002\tPain severity\t1\tscore\tnumeric\n"
    "003\tPain severity\t4\tscore\tnumeric";

inline constexpr const char* kSyntheaDR3 =
    "PATIENT\tDESCRIPTION\tVALUE\tUNITS\tTYPE\n"
    "001\tPain severity\t2\tscore\tnumeric\n"
    "002\tRespiratory Rate\t14\tmin\tnumeric\n"
    "003\tPain severity\t1\tscore\tnumeric\n"
    "001\tPain severity\t5\tscore\tnumeric\n"
    "002\tPain severity\t3\tscore\tnumeric\n"
    "001\tHeart rate\t99\tmin\tnumeric\n"
    "001\tPain severity\t4\tscore\tnumeric";

inline constexpr const char* kSyntheaDR4 =
    "ID\tRACE\tGENDER\tHEALTHCARE\tINCOME\n"
    "001\twhite\tM\t20350.20\t34899.50\n"
    "002\tasian\tF\t80000.00\t62342.75\n"
    "003\twhite\tF\t145000.35\t179235.89\n"
    "004\tblack\tM\t48000.00\t39880.00\n"
    "005\twhite\tF\t98200.00\t105000.00";

inline constexpr const char* kSyntheaDR5 =
    "ID\tRACE\tGENDER\tHEALTHCARE\tINCOME\n"
    "001\twhite\tF\t98200.00\t105000.00\n"
    "002\tasian\tM\t45000.50\t39200.00\n"
    "003\twhite\tF\t67890.25\t82450.75\n"
    "004\tblack\tF\t120000.00\t139500.00\n"
    "005\tasian\tF\t78900.00\t89400.00";

inline constexpr const char* kSyntheaKU1 =
    "START\tSTOP\tSYSTEM\tCODE\n"
    "2005/04/12\t2006/11/20\tSNOMED-CT\t230690007\n"
    "2007/08/03\t2010/02/17\tSNOMED-CT\t11687002\n"
    "2011/05/21\t2014/09/30\tSNOMED-CT\t44054006\n"
    "2015/01/13\t2018/08/07\tSNOMED-CT\t15777000\n"
    "2019/03/15\t2020/10/19\tSNOMED-CT\t195967001";

inline constexpr const char* kSyntheaKR1 =
    "DATE\tDESCRIPTION\tVALUE\tUNITS\n"
    "2001-02-15\tBody temperature\t37.6\tCel\n"
    "2001-02-15\tPain severity\t2\tscore\n"
    "2001-02-15\tBody Mass Index\t31.2\tkg/m2\n"
    "2001-02-15\tHeart rate\t84\tmin\n"
    "2001-02-15\tTobacco status\tCurrent every day smoker\t\n"
    "2001-02-15\tHousing status\tHomeless\t\n"
    "2001-02-15\tEmployment status\tUnemployed\t\n"
    "2001-02-15\tDo you feel hopeless\tYes\t\n"
    "2001-02-15\tIn the past week, have you had trouble sleeping\tYes\t";

inline constexpr const char* kEicuDU1 =
    "patientunitstayid\tgender\tage\tethnicity\thospitaldischargestatus\n"
    "001\tFemale\t86\tafrican american\texpired\n"
    "002\tFemale\t72\tcaucasian\talive\n"
    "003\tMale\t67\tafrican american\texpired\n"
    "004\tFemale\t90\tafrican american\texpired\n"
    "005\tFemale\t59\tafrican american\talive\n"
    "006\tFemale\t73\tafrican american\texpired\n"
    "007\tMale\t84\tcaucasian\texpired\n"
    "008\tFemale\t61\tafrican american\talive\n"
    "009\tMale\t70\tafrican american\talive\n"
    "010\tFemale\t> 89\tafrican american\texpired";

inline constexpr const char* kEicuDR1 =
    "PATIENT\tDESCRIPTION\tUNITS\tVALUE\n"
    "001\tTemperature\tTEMP ORAL\t36.6\n"
    "002\tTemperature\tTEMP TYMPANIC\t37.4\n"
    "002\tO2 Saturation\tO2 Sat\t94\n"
    "003\tTemperature\tTEMP ORAL\t38.1\n"
    "002\tTemperature\tTEMP ORAL\t36.9\n"
    "002\tRespiratory Rate\tResp\t18\n"
    "001\tBlood Pressure\tBP\t120/80\n"
    "002\tTemperature\tTEMP ORAL\t37.0\n"
    "003\tPain Assessment\tWDL\t\n"
    "002\tTemperature\tTEMP TYMPANIC\t36.8";

inline constexpr const char* kEicuDR5 =
    "age\ttax\tgender\tpatientunitstayid\tadmissionweight\tunitvisitnumber\tcost\tdischargeweight\n"
    "76\t1012.3\tFemale\t001\t65.2\t1\t11400.7\t66.1\n"
    "58\t875.0\tMale\t002\t82.0\t1\t9800.3\t84.0\n"
    "58\t875.0\tMale\t002\t82.0\t2\t10200.5\t83.5\n"
    "43\t1903.2\tFemale\t003\t70.3\t1\t7600.1\t69.0\n"
    "67\t1520.7\tMale\t004\t90.4\t1\t13400.0\t91.3";

}  // namespace appendix
